"""HTTP service wrapping the restoration library."""

from .app import app, create_app

__all__ = ["app", "create_app"]
