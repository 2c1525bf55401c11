"""Exception types shared across the toolkit."""


class TabbenchError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TabbenchError):
    """A spec file or run plan violates its contract."""


class SuiteSyntaxError(TabbenchError):
    """A config file could not be parsed at all."""


class UnknownFramework(ValidationError):
    pass


class UnknownTask(ValidationError):
    pass


class IoError(TabbenchError):
    """A file or URL resource could not be read or written."""


class SchemaError(TabbenchError):
    """Dataset contents disagree with the declared or inferred schema."""


class TooFewRows(TabbenchError):
    """More folds requested than rows available."""


class SpawnError(TabbenchError):
    """An adapter executable could not be started."""


class FormatError(TabbenchError):
    """An adapter output file is malformed."""


class ProbabilityError(FormatError):
    """Class probabilities out of range or rows not summing to one."""


class Unsupported(TabbenchError):
    """The adapter does not implement the requested protocol verb."""


class CorruptStore(TabbenchError):
    """A results file failed checksum or structural validation."""


class SingleClass(TabbenchError):
    """AUC undefined: only one label present in the truth."""


class UnknownClass(TabbenchError):
    """A truth label is absent from the prediction class list."""


class LengthMismatch(TabbenchError):
    pass


class ZeroDuration(TabbenchError):
    pass


class DegenerateInput(TabbenchError):
    """A statistic is undefined for the given shape of input."""


class UnsupportedAlpha(TabbenchError):
    pass


class UnsupportedK(TabbenchError):
    pass


class MissingBaseline(TabbenchError):
    """No constant-predictor value available for a (task, fold) cell."""


class DegenerateScale(TabbenchError):
    """Best observed score equals the baseline score for a task."""


class DisconnectedGraph(TabbenchError):
    """Pairwise comparison graph does not connect all frameworks."""


class ConstantFeature(TabbenchError):
    """A candidate split feature has a single distinct value in the node."""


class NoValidCutpoint(TabbenchError):
    """No cutpoint leaves the required minimum observations per side."""


class TooFewObservations(TabbenchError):
    pass


class PortInUse(TabbenchError):
    pass
