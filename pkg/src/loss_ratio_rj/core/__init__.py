"""Data model, log densities and full conditional distributions."""
