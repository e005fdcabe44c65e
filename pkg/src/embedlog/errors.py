"""Exception taxonomy shared by all embedlog modules."""


class EmbedLogError(Exception):
    """Base class for all embedlog errors."""


class SingularMatrix(EmbedLogError):
    """Determinant below the singularity threshold, or inverse residual too large."""


class RowSumViolation(EmbedLogError):
    """A row sum deviates from its required value beyond tolerance."""

    def __init__(self, row, total, expected=1.0):
        self.row = row
        self.total = total
        self.expected = expected
        super().__init__(
            f"row {row} sums to {total!r}, expected {expected!r}"
        )


class NegativeEntry(EmbedLogError):
    """A Markov matrix entry is negative beyond tolerance."""

    def __init__(self, row, col, value):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"entry ({row},{col}) = {value!r} is negative")


class NegativeOffDiagonal(EmbedLogError):
    """A rate matrix off-diagonal entry is negative beyond tolerance."""

    def __init__(self, row, col, value):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(
            f"off-diagonal entry ({row},{col}) = {value!r} is negative"
        )


class SpectrumOutOfClass(EmbedLogError):
    """Eigenvalues are not {1, real in (0,1), conjugate non-real pair}."""


class ImaginaryResidue(EmbedLogError):
    """A matrix expected to be real carries a non-negligible imaginary part."""


class DegenerateStep(EmbedLogError):
    """Branch family step matrix is degenerate; internal-consistency failure."""


class OffVariety(EmbedLogError):
    """Parameter vector does not satisfy the quadric constraint v4^2 - v5*v6 = -1/4."""


class KZero(EmbedLogError):
    """Operation requires a non-zero branch offset k."""


class NotRescalable(EmbedLogError):
    """Sampled combination cannot be rescaled onto the variety, or leaves the cone."""


class LOutOfRange(EmbedLogError):
    """Family index l outside the supported range."""


class DeltaOutOfBound(EmbedLogError):
    """A perturbation component violates its kappa bound."""


class NotMarkov(EmbedLogError):
    """Perturbed construction produced a matrix that is not Markov."""


class NotInFamily(EmbedLogError):
    """Matrix is not consistent with the perturbed-family eigenstructure."""


class NearDegenerateY(EmbedLogError):
    """delta_6 + delta_9 is too close to zero; recovery is ill-posed."""


class NotAWitness(EmbedLogError):
    """Candidate fails the open-set witness margins."""

    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)
