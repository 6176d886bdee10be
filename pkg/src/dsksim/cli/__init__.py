"""Configuration, presets, validation and the ``dsksim`` command."""

from .main import main

__all__ = ["main"]
