"""Exception types shared across the package.

The CLI maps ValidationError to exit code 1 and ConfigError to exit code 2;
everything else is a bug.
"""


class HopqgError(Exception):
    """Base class for all package errors."""


class ShapeError(HopqgError):
    """Incompatible tensor shapes; message names both shapes."""


class DegenerateRowError(HopqgError):
    """A softmax row (or attention neighborhood) with no unmasked entry."""


class ContractError(HopqgError):
    """An operation precondition was violated (e.g. non-scalar loss)."""


class ConfigError(HopqgError):
    """Invalid configuration value."""


class ValidationError(HopqgError):
    """A data record failed validation.

    Carries the 1-based line number when raised by the corpus loader.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlignmentError(HopqgError):
    """A token span could not be mapped onto the encoded sequence."""


class DecodeError(HopqgError):
    """A token id outside the vocabulary was passed to decode."""


class EnsembleError(HopqgError):
    """Ensembled models disagree on the vocabulary."""


class TrainingDiverged(HopqgError):
    """Loss became NaN/Inf during training; message carries step and batch ids."""
