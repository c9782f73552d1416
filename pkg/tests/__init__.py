"""Test suite for graphvq."""
