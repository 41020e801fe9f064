class DFBenchError(Exception):
    """Base class for every error raised by the benchmark."""


class ShapeMismatchError(DFBenchError, ValueError):
    pass


class EmptyInputError(DFBenchError, ValueError):
    pass


class NonFiniteValueError(DFBenchError, ValueError):
    pass


class ConfigFileError(DFBenchError, ValueError):
    pass


class ManifestParseError(DFBenchError, ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateSampleError(DFBenchError, ValueError):
    def __init__(self, sample_id: str):
        super().__init__(f"duplicate sample_id {sample_id!r}")
        self.sample_id = sample_id


class SplitAssignmentError(DFBenchError, ValueError):
    pass


class ImageDecodeError(DFBenchError, ValueError):
    pass


class UnknownDetectorError(DFBenchError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"unknown detector {name!r}")
        self.name = name

    def __str__(self) -> str:
        return self.args[0]


class DuplicateDetectorError(DFBenchError, ValueError):
    pass


class NotBundledError(DFBenchError, NotImplementedError):
    def __init__(self, name: str):
        super().__init__(f"detector {name!r} is not bundled - provide external plug-in")
        self.name = name


class TrainingDivergedError(DFBenchError, RuntimeError):
    def __init__(self, message: str, last_good_checkpoint=None):
        super().__init__(message)
        self.last_good_checkpoint = last_good_checkpoint


class CheckpointVersionError(DFBenchError, ValueError):
    pass


class CorruptCheckpointError(DFBenchError, ValueError):
    pass


class UndefinedAUCError(DFBenchError, ValueError):
    pass


class AUCDisagreementError(DFBenchError, ArithmeticError):
    pass
