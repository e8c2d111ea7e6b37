"""Exception types raised by knotpack."""


class CurveError(ValueError):
    """A curve violates a structural requirement (too few vertices, NaN, ...)."""


class SelfIntersectionError(CurveError):
    """Two non-adjacent segments of a curve touch or cross.

    Attributes
    ----------
    pair : tuple of int
        Indices of the offending segments.
    distance : float
        Measured distance between them.
    """

    def __init__(self, pair, distance):
        self.pair = (int(pair[0]), int(pair[1]))
        self.distance = float(distance)
        super().__init__(
            f"segments {self.pair[0]} and {self.pair[1]} intersect "
            f"(distance {self.distance:.3e})"
        )


class PreconditionError(ValueError):
    """Inputs to a bound check do not satisfy the hypotheses of the bound."""
