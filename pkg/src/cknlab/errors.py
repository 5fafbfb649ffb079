"""Exception types shared across the package."""


class CKNError(Exception):
    """Base class for every numerical or contract failure raised here."""


class QuadratureError(CKNError):
    pass


class DivergenceDetected(QuadratureError):
    def __init__(self, message: str, component: str | None = None):
        super().__init__(message if component is None else f"{component}: {message}")
        self.component = component


class NonFinite(QuadratureError):
    pass


class PeakNotFound(QuadratureError):
    pass


class InvalidSpec(CKNError):
    pass


class UnsupportedProfile(CKNError):
    pass


class UnsupportedAngular(CKNError):
    pass


class ZeroDenominator(CKNError):
    pass


class NotOnLineC(CKNError):
    pass


class NonPositiveSample(CKNError):
    pass


class FactorizationFailure(CKNError):
    pass


class NoConvergence(CKNError):
    pass
