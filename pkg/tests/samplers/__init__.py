"""Tests for the samplers."""
