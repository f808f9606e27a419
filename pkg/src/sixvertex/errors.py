"""Exception hierarchy.

Every error carries an optional ``stage`` so the CLI can name the failing
step of a chain.
"""


class SixVertexError(Exception):
    stage: str | None = None

    def __init__(self, message: str = "", *, stage: str | None = None, **details):
        super().__init__(message)
        if stage is not None:
            self.stage = stage
        self.details = details


class IndistinguishableFromZero(SixVertexError):
    pass


class NotImmersed(SixVertexError):
    stage = "convexity"


class NotLocallyConvex(SixVertexError):
    stage = "convexity"


class NotGloballyConvex(SixVertexError):
    stage = "convexity"


class LeavesAffineChart(SixVertexError):
    pass


class ResidualTooLarge(SixVertexError):
    stage = "lift"


class EverywhereDegenerate(SixVertexError):
    pass


class IntegrationFailure(SixVertexError):
    stage = "integration"


class NotPeriodic(SixVertexError):
    pass


class PointNotOnConic(SixVertexError):
    pass


class SlopeAmbiguous(SixVertexError):
    pass


class DegenerateConicCurve(SixVertexError):
    stage = "sextactic"


class DegenerateTangent(SixVertexError):
    pass


class NoNontrivialSolution(SixVertexError):
    pass


class GramSingular(SixVertexError):
    pass


class NotDisconjugate(SixVertexError):
    stage = "disconjugacy"


class SpecError(SixVertexError):
    stage = "validation"
