"""Tests for interval-object."""
