"""Tests for morsepi."""
