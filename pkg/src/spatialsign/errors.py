"""Exception hierarchy shared by all modules."""


class SpatialSignError(Exception):
    """Base class for errors raised by :mod:`spatialsign`."""


class InvalidArgument(SpatialSignError, ValueError):
    pass


class IncompatibleGrids(SpatialSignError, ValueError):
    """Two objects were sampled on different grids."""


class DegenerateObservation(SpatialSignError, ValueError):
    """An observation coincides with the center where a strictly positive residual is required."""


class NotSelfAdjoint(SpatialSignError, ValueError):
    pass


class AmbiguousAlignment(SpatialSignError, ValueError):
    """The estimate is (numerically) orthogonal to the reference direction."""


class DegenerateEigenvalue(SpatialSignError, ValueError):
    pass


class InsufficientRank(SpatialSignError, ValueError):
    pass


class NumericalFailure(SpatialSignError, ArithmeticError):
    pass
