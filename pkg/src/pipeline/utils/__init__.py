"""Pipeline utilities."""

from .caching import CacheManager
from .reporting import ArtifactWriter, ReportGenerator, staging_directory

__all__ = ["ArtifactWriter", "CacheManager", "ReportGenerator", "staging_directory"]
