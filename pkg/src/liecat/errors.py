"""Exception hierarchy.

Every error carries a stable class name which the CLI prints as ``error=<Name>``.
``DomainError`` subclasses map to exit status 1, ``SpecError`` subclasses to 2.
"""


class LieCatError(Exception):
    """Base class for all package errors."""

    @property
    def name(self):
        return type(self).__name__


class DomainError(LieCatError):
    """A computation was asked outside the domain of its inputs."""


class SpecError(LieCatError):
    """Malformed input: unparsable files, bad arguments, failed validation."""


class NonFinite(SpecError):
    pass


class DomainExit(DomainError):
    """A probe or trajectory left the domain of definition.

    ``t_exit`` is the last time at which the state was still valid (``None``
    outside of integration), ``state`` the last valid state.
    """

    def __init__(self, message, t_exit=None, state=None):
        super().__init__(message)
        self.t_exit = t_exit
        self.state = state


class InvalidMorphism(DomainError):
    pass


class InvalidObject(DomainError):
    pass


class NotComposable(DomainError):
    pass


class InvalidResult(DomainError):
    pass


class SamplerUnavailable(DomainError):
    pass


class NotInvertible(DomainError):
    pass


class OutwardVector(DomainError):
    pass


class NotHomomorphism(DomainError):
    pass


class ProjectionError(DomainError):
    pass


class UnsupportedFamily(DomainError):
    pass


class InvalidConfiguration(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class BoundaryConfiguration(DomainError):
    pass


class BadDimension(DomainError):
    pass


class InvalidAlgebra(SpecError):
    pass
