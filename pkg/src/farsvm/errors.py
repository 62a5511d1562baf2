"""Exception and warning taxonomy shared across the package.

Everything raised on purpose derives from :class:`FarSvmError` so callers can
catch one base class at the CLI boundary.  Warning classes derive from
``UserWarning`` and are emitted through :func:`warnings.warn`.
"""


class FarSvmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(FarSvmError, ValueError):
    """A scalar argument is outside its documented domain."""


class MalformedFile(FarSvmError):
    """A data file exists but cannot be parsed into complex samples."""


class MissingMetadata(FarSvmError):
    """No metadata sidecar was found, or it lacks a required field."""


class InconsistentCells(FarSvmError):
    """Range cells in one dataset disagree on length."""


class InvalidWindow(FarSvmError, ValueError):
    """Segmentation step or window length is out of range."""


class SecondaryCellNotAllowed(FarSvmError):
    """An operation meant for primary/clutter cells got a secondary cell."""


class DegenerateInput(FarSvmError):
    """Input admits no finite value for the requested statistic."""


class EmptyTrainingSet(FarSvmError):
    """A training operation received no feature vectors."""


class SingleClassData(FarSvmError):
    """Training data contains only one label."""


class NoClutterSamples(FarSvmError):
    """A false-alarm-rate estimate was requested without clutter vectors."""


class NoTargets(FarSvmError):
    """A split or evaluation step found no target-labelled vectors."""


class NoClutter(FarSvmError):
    """A split or evaluation step found no clutter-labelled vectors."""


class EmptyTestSet(FarSvmError):
    """Evaluation was requested on an empty test partition."""


class NonConvergenceWarning(UserWarning):
    """The dual solver hit its update budget with KKT violations left.

    The trained model is still returned (flagged via ``training_meta``); this
    warning is the diagnostic channel.
    """


class InfeasibleToleranceWarning(UserWarning):
    """The requested FAR tolerance is finer than 1/n_clutter can resolve."""
