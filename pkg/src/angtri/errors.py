"""Exception hierarchy shared by all modules."""


class GeometryError(ValueError):
    """Base class for degenerate or invalid geometric input."""


class ZeroVector(GeometryError):
    pass


class ParallelLines(GeometryError):
    pass


class DegenerateProjection(GeometryError):
    """A direction is (nearly) parallel to the normal of the plane it is projected onto."""


class EpipoleDegenerate(GeometryError):
    """A ray passes through the other camera center, so its epipolar plane is undefined."""


class BothNormalsDegenerate(GeometryError):
    """Both candidate epipolar normals of the minimax correction vanish."""


class SingularSpectrum(GeometryError):
    """The requested singular vector is not unique."""


class DegenerateBaseline(GeometryError):
    pass


class ChainNotIntersecting(GeometryError):
    pass


class InfeasibleSpec(ValueError):
    """A synthetic scene specification cannot be satisfied."""
