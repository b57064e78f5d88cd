"""Exception hierarchy shared by all modules."""


class DiracBubblesError(ValueError):
    """Base error; subclasses ValueError so plain ValueError handlers still work"""


class DimensionError(DiracBubblesError):
    """Dimension outside the supported range, or mismatched array shapes"""


class DomainError(DiracBubblesError):
    """Point outside the domain of a map (north pole, kernel pole, ball boundary)"""


class GridError(DiracBubblesError):
    """Grid malformed or too small for the requested stencil"""


class QuadratureError(DiracBubblesError):
    """Quadrature rule unsupported or integrand not convergent"""


class ConfigError(DiracBubblesError):
    """Invalid suite configuration or environment override"""
