"""Exception hierarchy for shellspectra.

Two broad families matter to callers: configuration/parameter problems
(:class:`ParameterError` and friends -- the input is wrong) and numerical
failures (:class:`NumericsError` and friends -- the input was fine but a
computation could not be completed to tolerance).  The command line maps the
first family to exit code 2 and the second to exit code 3.
"""

from __future__ import annotations


class ShellSpectraError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(ShellSpectraError):
    """Invalid parameters, geometry, or configuration."""


class ConstraintViolation(ParameterError):
    """Interaction matrix does not satisfy alpha*beta - gamma*delta = -1."""


class UnclassifiableInteraction(ParameterError):
    """Interaction outside the delta / intermediate / delta-prime trichotomy.

    For real parameters with the symplectic constraint this region reduces to
    beta = 0 with gamma = delta = -1.
    """


class ConfigError(ParameterError):
    """Unparseable or inconsistent run configuration."""


class NumericsError(ShellSpectraError):
    """A numerical procedure failed to reach its stated tolerance."""


class BracketingFailure(NumericsError):
    """A root or band-edge bracket could not be established or validated."""


class DegenerateEdge(NumericsError):
    """Discriminant at a located band edge is not +-1 to tolerance."""


class StepFailure(NumericsError):
    """The adaptive integrator failed inside a cell."""


class PositionMismatch(ParameterError):
    """Two boundary-data vectors were combined at different radii."""


class DegenerateEndpoint(NumericsError):
    """A shooting solution degenerated to the zero vector at an endpoint."""


class NonDecayingStart(NumericsError):
    """No strictly contracting Floquet direction exists (epsilon <= 0)."""


class BasisZero(NumericsError):
    """The periodic Floquet basis solution vanishes at a shell."""


class GridMisaligned(ParameterError):
    """Finite-difference step does not place shells midway between nodes."""


class ConvergenceFailure(NumericsError):
    """An iterative refinement exhausted its budget without converging."""
