"""Structural and efficiency analyzers for strategic-form games."""
