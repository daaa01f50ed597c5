"""ricci-lab - A numerical laboratory for Ricci flow singularities and curvature norms."""

from ricci_lab.__about__ import __version__

__all__ = ["__version__"]
