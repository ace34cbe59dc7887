"""Circuits over sets of natural numbers."""
