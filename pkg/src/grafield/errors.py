"""Exception types shared across the package.

The CLI maps these onto exit codes: validation errors exit 2, data/IO
errors exit 3, numerical failures exit 4.
"""


class GraphValidationError(ValueError):
    """Invalid graph input (negative weights, empty edge list, bad shapes)."""


class IsolatedVertexError(GraphValidationError):
    """A vertex with zero degree reached an estimator that requires d > 0."""

    def __init__(self, labels, hint="use a smoothed estimator (tau > 0) instead"):
        self.labels = list(labels)
        shown = ", ".join(str(v) for v in self.labels[:8])
        more = "" if len(self.labels) <= 8 else f" (+{len(self.labels) - 8} more)"
        super().__init__(
            f"isolated vertices {shown}{more}: the unsmoothed estimator divides "
            f"by degree; {hint}"
        )


class DegenerateTauError(ValueError):
    """The data-driven shrinkage denominator is not positive (regular graph)."""


class DataError(RuntimeError):
    """Dataset fetching, checksum, or file format failure."""


class NumericalError(RuntimeError):
    """An eigensolver or optimizer failed to meet its tolerance."""
