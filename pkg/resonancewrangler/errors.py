"""Exceptions raised by the numeric modules.

Outcomes that are expected results of an experiment (a Newton solve that does not converge, a degree sum that cannot be certified, an inconclusive condition) are reported through return values. The exceptions here signal misuse or a numeric breakdown.
"""


class ResonanceError(Exception):
    """Base class for every error raised by resonancewrangler."""
    pass


class ConfigurationError(ResonanceError):
    """Indicates that a problem, family or experiment was configured with values outside their documented ranges."""
    pass


class EllipticityError(ConfigurationError):
    """Indicates that the coefficient of the elliptic operator is not strictly positive at some grid node."""
    pass


class DimensionError(ResonanceError):
    """Indicates that a grid function was combined with a decomposition built on a different grid."""
    pass


class ResonanceMismatchError(ResonanceError):
    """Indicates that the requested resonance value is not an eigenvalue of the discrete operator, so the problem is not at resonance."""
    pass


class GroupExtensionError(ResonanceError):
    """Indicates a backward-in-time semigroup application to a state with a nonzero component in the contracting subspace."""
    pass


class DivergenceError(ResonanceError):
    """Indicates that the time integrator produced a non-finite state."""
    def __init__(self, time, msg="non-finite state"):
        super(DivergenceError, self).__init__(time, msg)
        self.time = time
        self.msg = msg

    def __str__(self):
        return "%s at t = %.6g" % (self.msg, self.time)


class NonlinearityDomainError(ResonanceError):
    """Indicates that a nonlinearity returned a non-finite value."""
    pass


class DegreeUndefinedError(ResonanceError):
    """Indicates that a vector field vanishes (within the certification floor) on the boundary where its degree was requested."""
    pass


class ResolutionError(ResonanceError):
    """Indicates that the boundary sampling is too coarse to follow the winding of a planar vector field."""
    pass


class UnsupportedDimensionError(ResonanceError):
    """Indicates a Brouwer degree request in a kernel of dimension other than one or two."""
    pass
