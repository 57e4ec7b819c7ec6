"""HTTP service wrapping the core package; the CLI is a thin client of it."""

from .app import app, create_app

__all__ = ["app", "create_app"]
