"""Battery SoH forecasting with teacher-student compression for edge targets."""

from . import backend

__version__ = "0.1.0"
__all__ = ["backend", "__version__"]
