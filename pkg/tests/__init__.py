"""Tests for loss-ratio-rj."""
