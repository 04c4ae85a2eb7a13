"""Exception types raised across the identification pipeline.

Every failure mode surfaced by the library is a subclass of ``LtpsidError``
so callers (and the CLI) can map them onto exit codes: configuration and
validation problems, data-format problems, and numerical failures.
"""

from __future__ import annotations


class LtpsidError(Exception):
    """Base class for all library errors."""


class ConfigError(LtpsidError):
    """Invalid configuration or precondition violation (CLI exit code 2)."""


class DataError(LtpsidError):
    """Malformed input files or records (CLI exit code 3)."""


class NumericalPipelineError(LtpsidError):
    """Numerical failure inside the pipeline (CLI exit code 4)."""


class DimensionMismatch(ConfigError):
    """Matrix shapes inconsistent with the declared dimensions."""


class NumericalError(NumericalPipelineError):
    """An eigensolver or factorization failed to converge."""


class SingularMatrix(NumericalPipelineError):
    """A matrix that must be invertible is singular to working precision."""


class DegenerateGain(NumericalPipelineError):
    """Average steady-state gain too close to zero to normalize against."""


class LengthNotDivisible(ConfigError):
    """Signal length is not a multiple of the period."""


class TransientNotConverged(NumericalPipelineError):
    """Steady-state burn-in hit the repetition cap without converging."""


class RankDeficient(NumericalPipelineError):
    """Lifted input spectrum loses row rank at some frequency."""

    def __init__(self, frequency_index: int, smallest_singular_value: float):
        self.frequency_index = frequency_index
        self.smallest_singular_value = smallest_singular_value
        super().__init__(
            f"input spectrum rank-deficient at frequency index {frequency_index} "
            f"(smallest singular value {smallest_singular_value:.3e}); "
            "excitation insufficient or degenerate"
        )


class IndexCollision(NumericalPipelineError):
    """Aliasing index map hit the same (tag, lag) twice; implementation fault."""


class NonRealResidue(NumericalPipelineError):
    """IDFT of the frequency response left a non-negligible imaginary part."""


class BlockRangeExceeded(ConfigError):
    """Hankel block sizes need lags beyond the available record length."""


class OrderTooLarge(ConfigError):
    """Requested state order exceeds what the Hankel dimensions support."""


class ShiftRankDeficient(NumericalPipelineError):
    """Shifted observability basis lost rank; order overestimated or q too small."""

    def __init__(self, tag: int):
        self.tag = tag
        super().__init__(
            f"shifted observability basis rank-deficient at tag time {tag}; "
            "increase the Hankel row count or lower the order"
        )


class UnstableEstimate(NumericalPipelineError):
    """Estimated state matrices have monodromy spectral radius >= 1."""


class IllConditioned(NumericalPipelineError):
    """A least-squares regressor is too ill-conditioned to trust."""


class DegenerateReference(NumericalPipelineError):
    """Fit-metric denominator underflows; reference response is constant."""


class PipelineError(NumericalPipelineError):
    """Wraps a sub-operation error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")
