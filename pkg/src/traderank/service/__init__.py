"""HTTP service exposing every ranking pipeline as request/response."""

from .app import app

__all__ = ["app"]
