"""Exception hierarchy shared across the pipeline."""


class AutotabError(Exception):
    """Base class for all pipeline errors."""


# --- dataset ---------------------------------------------------------------

class MalformedInput(AutotabError):
    pass


class EmptyTable(AutotabError):
    pass


class AllRowsDropped(AutotabError):
    pass


class TargetNotFound(AutotabError):
    pass


class TaskKindMismatch(AutotabError):
    pass


# --- preprocessing ---------------------------------------------------------

class EmptyMatrix(AutotabError):
    pass


class DimensionMismatch(AutotabError):
    pass


class SingleClass(AutotabError):
    pass


class MinorityTooSmall(AutotabError):
    pass


# --- models ----------------------------------------------------------------

class UnknownAlgorithmName(AutotabError):
    pass


class DegenerateTarget(AutotabError):
    pass


class KTooLarge(AutotabError):
    pass


# --- unsupervised ----------------------------------------------------------

class KExceedsRows(AutotabError):
    pass


class ComponentCountTooLarge(AutotabError):
    pass


class NonPositiveGamma(AutotabError):
    pass


# --- stats -----------------------------------------------------------------

class LengthMismatch(AutotabError):
    pass


class ConstantInput(AutotabError):
    pass


# --- explainability --------------------------------------------------------

class FeatureOutOfRange(AutotabError):
    pass


class TooManyFeaturesForExact(AutotabError):
    pass


class AlreadyDesiredClass(AutotabError):
    pass


# --- training orchestration ------------------------------------------------

class TooFewRows(AutotabError):
    pass


class InsufficientRowsForFolds(AutotabError):
    pass


class ConfigError(AutotabError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class StageError(AutotabError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
