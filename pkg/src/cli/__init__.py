"""Command-line surface."""

from src.cli.app import app

__all__ = ["app"]
