"""Tests for posterior summaries and diagnostics."""
