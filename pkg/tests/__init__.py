"""Tests for cia_sim."""
