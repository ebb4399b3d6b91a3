# symuniv/errors.py


class SymUnivError(ValueError):
    """Base class for every domain error raised by symuniv."""

    code = "symuniv-error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class InvalidArgumentError(SymUnivError):
    code = "invalid-argument"


class UnsupportedWeightError(SymUnivError):
    code = "unsupported-weight"


class UnsupportedKindError(SymUnivError):
    code = "unsupported-kind"


class DeligneViolationError(SymUnivError):
    code = "deligne-violation"


class NumericInstabilityError(SymUnivError):
    code = "numeric-instability"


class InsufficientCacheError(SymUnivError):
    code = "insufficient-cache"


class CacheIntegrityError(SymUnivError):
    code = "cache-integrity"


class OutOfRegionError(SymUnivError):
    code = "out-of-region"


class HypothesisViolationError(SymUnivError):
    code = "hypothesis-violation"


class NonVanishingViolationError(SymUnivError):
    code = "non-vanishing-violation"


class ResolutionError(SymUnivError):
    code = "resolution"


class ContourViolationError(SymUnivError):
    code = "contour-violation"


class ConfigError(SymUnivError):
    """Aggregated RunConfig validation failure."""

    code = "config"

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), "problems": self.problems}
