"""Exception and warning types shared across the library."""


class LsqError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(LsqError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class DomainError(LsqError):
    """A scalar function was applied outside its numerical domain."""


class NonLinearAction(LsqError):
    """A callable probed for linearity failed the check."""


class InvalidExponent(LsqError):
    """An L_p exponent outside the admissible range was requested."""


class NegativeInput(LsqError):
    """An operator that must be positive semidefinite has a negative eigenvalue."""


class NotUnital(LsqError):
    """A generator does not annihilate the identity."""


class NotPrimitive(LsqError):
    """The semigroup has a degenerate kernel or a rank-deficient stationary state."""


class NotReversible(LsqError):
    """The generator fails detailed balance with respect to the given state."""


class DegenerateWitness(LsqError):
    """Every optimizer restart produced a witness with vanishing entropy."""


class DimensionMismatch(LsqError):
    """Operator shapes are incompatible."""


class DimensionCap(LsqError):
    """The requested system exceeds the dense desk-scale limit."""


class SeriesDiverges(LsqError):
    """The geometric series behind a block-norm constant does not converge."""


class GibbsNotStationary(LsqError):
    """The thermal state is not stationary for the constructed generator."""


class NegativeRate(LsqError):
    """A canonical decay-rate matrix has an eigenvalue below -1e-12."""


class BoundViolated(LsqError):
    """A numerically verified inequality was exceeded beyond tolerance."""


class EigenResidualExceeded(LsqError):
    """A claimed eigen-operator fails its residual tolerance."""


class InvalidEpsilon(LsqError):
    """A target accuracy outside (0, 1) was requested."""


class ConfigError(LsqError):
    """An experiment configuration is malformed or fails schema validation."""


class UnknownColumn(ConfigError):
    """A requested column is not present in the result table."""


class ConvergenceWarning(UserWarning):
    """An iterative search stalled before reaching its tolerance."""


class DegeneracyWarning(UserWarning):
    """Two frequency clusters are closer than ten times the merging tolerance."""
