"""Exception hierarchy shared by every stage of the pipeline."""


class PipelineError(Exception):
    """Base class. ``stage`` is filled in by the orchestrator when known."""

    exit_code = 3

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class ConfigError(PipelineError):
    exit_code = 2


class ArtifactError(PipelineError):
    """Missing stage artifact, or a version/kind tag that does not match."""

    exit_code = 2


class DataError(PipelineError):
    exit_code = 3


class ShapeError(PipelineError, ValueError):
    """Dimension mismatch between two operands."""

    exit_code = 3

    def __init__(self, message, expected=None, got=None, stage=None):
        if expected is not None or got is not None:
            message = f"{message}: expected {expected}, got {got}"
        super().__init__(message, stage=stage)
        self.expected = expected
        self.got = got


class SelectionError(DataError):
    pass


class NumericError(PipelineError):
    exit_code = 4
