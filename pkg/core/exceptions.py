"""
Error hierarchy shared by every module.

``exit_code`` is what the management commands exit with when the error
escapes: 3 for bad or inconsistent data, 4 for numeric failures.
"""


class TdaError(Exception):
    """Base class for all tdasum errors."""

    exit_code = 3


class DataError(TdaError):
    exit_code = 3


class NumericError(TdaError):
    exit_code = 4


# core

class RawPairInverted(DataError):
    pass


class GridMismatch(DataError):
    pass


class MalformedFile(DataError):
    """A file did not parse; the message carries ``path:line`` context."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


# homology

class EmptyField(DataError):
    pass


class BadTiling(DataError):
    pass


# smoothing

class EmptyCloud(DataError):
    pass


class BadBandwidth(DataError):
    pass


class TooFewPixels(DataError):
    pass


class SingularFit(NumericError):
    pass


# summaries

class EmptySilhouette(DataError):
    pass


class EmptyDiagram(DataError):
    pass


# inference

class EmptyInput(DataError):
    pass


class BadP(DataError):
    pass


class TooFewCurves(DataError):
    pass


class DegenerateSigma(NumericError):
    pass


class EmptyGroup(DataError):
    pass


# learn

class BadK(DataError):
    pass


class EmptyCandidates(DataError):
    pass


class BadDim(DataError):
    pass


# simulate / experiments

class BadConfig(DataError):
    """Invalid configuration; ``errors`` maps each field to its messages."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"__all__": [errors]}
        self.errors = {key: list(messages) for key, messages in errors.items()}
        lines = [
            f"{key}: {message}"
            for key, messages in sorted(self.errors.items())
            for message in messages
        ]
        super().__init__("; ".join(lines))
