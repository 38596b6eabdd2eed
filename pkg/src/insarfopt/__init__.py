"""Coverage-maximizing placement and power control for a two-UAV bistatic InSAR formation."""

from insarfopt.sca_ao import __version__

__all__ = ["__version__"]
