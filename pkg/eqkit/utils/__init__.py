"""Numeric and serialization helpers shared across eqkit."""
