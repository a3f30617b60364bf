"""Tests for run orchestration."""
