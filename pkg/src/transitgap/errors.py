"""Exception and warning types shared across the package."""


class TransitGapError(Exception):
    """Base class for all errors raised by this package."""


# --- loading / schema ---

class SchemaError(TransitGapError):
    """A source file is missing a column or carries an out-of-range value."""


class MissingParent(TransitGapError):
    """A census unit references a parent id that does not exist."""


class NegativeCount(TransitGapError):
    """A count-typed field is negative."""


class DuplicateMonth(TransitGapError):
    """The same (year, month) appears more than once in a monthly file."""


class InconsistentEnrollment(TransitGapError):
    """Summer enrollment exceeds total enrollment."""


class OutOfRangeCoordinate(TransitGapError):
    """Latitude outside [-90, 90] or longitude outside [-180, 180]."""


# --- design matrices / splits ---

class UnknownFeature(TransitGapError):
    """A requested feature name does not exist on the record type."""


class ConstantFeature(TransitGapError):
    """A feature column has zero variance and cannot be standardized."""


class TooFewRows(TransitGapError):
    """Not enough rows for the requested operation."""


# --- model fitting ---

class SingularDesign(TransitGapError):
    """Design matrix is rank deficient even after ridge jitter."""


class ExpansionTooLarge(TransitGapError):
    """Polynomial expansion would produce at least as many terms as rows."""


class DivergedLoss(TransitGapError):
    """Training loss became non-finite or exploded."""


class DimensionMismatch(TransitGapError):
    """Feature matrix width does not match the model's feature spec."""


class ZeroMeanActual(TransitGapError):
    """Relative RMSE is undefined when the actual targets average to zero."""


class KindUnsupported(TransitGapError):
    """The operation does not support this model kind."""


# --- analysis ---

class EmptyDataset(TransitGapError):
    """The dataset has no rows to evaluate."""


class DegeneratePredictor(TransitGapError):
    """The predictor column has zero variance."""


class SpecMismatch(TransitGapError):
    """Models or datasets disagree on the feature spec."""


class NegativeOverride(TransitGapError):
    """A scenario override must be non-negative."""


# --- pipeline / service ---

class MissingArtifact(TransitGapError):
    """A required upstream artifact does not exist on disk."""


class ConfigError(TransitGapError):
    """The pipeline configuration is invalid."""


# --- structured warnings (flag-not-fail conditions) ---

class TransitGapWarning(UserWarning):
    """Base class for structured warnings emitted by this package."""


class ZeroPopulationGroupWarning(TransitGapWarning):
    """A zero-population block group carries a nonzero count variable."""


class EmptyCoverageWarning(TransitGapWarning):
    """A stop serves no census blocks within the coverage radius."""


class EmptyStopListWarning(TransitGapWarning):
    """Filtering removed every stop from the input file."""
