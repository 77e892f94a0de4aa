"""Exception types shared across the package."""


class LabError(ValueError):
    """Base class for contract violations raised by this package."""


class GridMismatchError(LabError):
    """Two objects built over different sampling grids were combined."""


class ResolutionError(LabError):
    """The sampling grid is too coarse to resolve the requested object."""


class DegenerateInputError(LabError):
    """Input violates a size restriction that keeps a construction meaningful."""


class SymbolSupportError(LabError):
    """A multiplier piece is supported outside its declared frequency interval,
    or declared intervals overlap."""


class ConstructionError(LabError):
    """A geometric construction cannot be carried out on this grid."""
