"""Exception hierarchy shared by all radflow modules."""


class RadflowError(Exception):
    """Base class for every error raised by radflow."""


class DomainError(RadflowError, ValueError):
    """An argument lies outside the domain of a formula (rho <= 0, bad radicand, ...)."""


class QuadratureError(RadflowError):
    """Adaptive quadrature did not reach its tolerance within the refinement budget."""


class OrderOverflowError(RadflowError):
    """The jet truncation order is too small for the requested derivative."""


class ValidityError(RadflowError):
    """A catalog entry was evaluated against an EOS outside its validity set."""


class EosMismatchError(ValidityError):
    """An operation needs a specific EOS variant (e.g. entropic) and got another."""


class IncompatibleScalingError(RadflowError):
    """A scaling transformation is incompatible with the EOS or the law ("---" cells)."""


class PositivityError(RadflowError):
    """Density (or pressure) became non-positive during a simulation."""


class CFLCollapseError(RadflowError):
    """The admissible time step collapsed below the floor."""


class StencilUnderflowError(RadflowError):
    """A transported domain spans too few cells to integrate over."""


class InsufficientSamplesError(RadflowError):
    """A time series has too few samples for the requested diagnostic."""


class ConfigError(RadflowError):
    """Scenario configuration failed validation."""
