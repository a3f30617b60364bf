"""Posterior summaries and convergence diagnostics."""
