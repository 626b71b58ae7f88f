"""Green-function splitting maps on warped-product models of nonnegative Ricci curvature."""
from .errors import (ConfigError, ConvergenceError, DegenerateConfigurationError, DomainError,
                     GreensplitError, ValidationError)
from .manifold import (CENTER, ManifoldSpec, Point, cone, euclidean, geodesic_distance, load_spec,
                       warped)

__all__ = [
    "CENTER", "ConfigError", "ConvergenceError", "DegenerateConfigurationError", "DomainError",
    "GreensplitError", "ManifoldSpec", "Point", "ValidationError", "cone", "euclidean",
    "geodesic_distance", "load_spec", "warped",
]
