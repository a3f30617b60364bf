"""Pipeline configuration package."""

from .settings import RunConfig

__all__ = ["RunConfig"]
