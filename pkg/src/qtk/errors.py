"""Exception hierarchy.

Every error carries a machine-readable ``code`` and the process exit code the
CLI maps it to (2 usage, 3 cap exceeded, 1 everything that is a failed check).
"""


class QtkError(Exception):
    code = "error"
    exit_code = 1


class InvalidVertex(QtkError, ValueError):
    code = "invalid_vertex"
    exit_code = 2


class InvalidSpec(QtkError, ValueError):
    code = "invalid_spec"
    exit_code = 2


class InvalidConfig(QtkError, ValueError):
    code = "invalid_config"
    exit_code = 2


class SizeCapExceeded(QtkError):
    code = "size_cap_exceeded"
    exit_code = 3


class ArityMismatch(QtkError, ValueError):
    code = "arity_mismatch"
    exit_code = 2


class NotSymmetric(QtkError, ValueError):
    code = "not_symmetric"


class NoConvergence(QtkError, ArithmeticError):
    code = "no_convergence"


class NonZeroDiagonal(QtkError, ValueError):
    code = "nonzero_diagonal"


class RateOutOfRange(QtkError, ValueError):
    code = "rate_out_of_range"
    exit_code = 2


class BasepointMismatch(QtkError, ValueError):
    code = "basepoint_mismatch"


class RateMismatch(QtkError, ValueError):
    code = "rate_mismatch"


class EmptyFactorList(QtkError, ValueError):
    code = "empty_factor_list"


class SupportOutsidePoints(QtkError, ValueError):
    code = "support_outside_points"


class NotMeanZero(QtkError, ValueError):
    code = "not_mean_zero"


class NegativeSelfInner(QtkError, ArithmeticError):
    code = "negative_self_inner"


class DegenerateForm(QtkError, ValueError):
    code = "degenerate_form"


class ExplorationExceeded(QtkError):
    """A group element moved a point outside the explored region."""

    code = "exploration_exceeded"
    exit_code = 3


class DecompositionMismatch(QtkError, ValueError):
    code = "decomposition_mismatch"


class NonConstantS(QtkError, ValueError):
    code = "nonconstant_s"
