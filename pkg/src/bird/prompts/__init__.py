"""Prompt templates shipped with the package, one directory per version."""
