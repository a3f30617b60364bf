"""Tests for the data model, densities and conditionals."""
