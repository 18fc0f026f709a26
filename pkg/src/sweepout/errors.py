"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument is outside the operation's domain."""


class SurfaceError(InvalidArgument):
    """Mesh input is not a valid triangulated 2-manifold."""


class PreconditionError(InvalidArgument):
    """A geometric hypothesis required by a decomposition does not hold."""


class ResolutionError(RuntimeError):
    """A requested radius is below what the mesh can resolve."""


class NoCutError(RuntimeError):
    """No balanced sweep cut exists for a domain."""
