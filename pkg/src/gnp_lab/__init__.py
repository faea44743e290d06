"""Numerical checks for domains whose inward normals meet a fixed convex set."""
from __future__ import annotations

__version__ = "0.1.0"
SCHEMA_VERSION = "1.0"
