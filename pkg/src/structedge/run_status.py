"""Run status codes for the structured edge toolkit."""

from enum import Enum


class RunStatus(Enum):
    """
    Enum for standardized return codes of pipeline and loader methods.

    Each status represents a specific result or error case:
    - SUCCESS: Operation was successful.
    - CONFIG_ERROR: The run configuration is invalid or has unknown keys.
    - IO_ERROR: A file could not be read or written.
    - DATA_MISMATCH: Model, options and data do not fit together.
    - EMPTY_DATASET: The dataset holds no usable image/ground-truth pair.
    - UNKNOWN_ERROR: An unspecified or unexpected error occurred.
    """
    SUCCESS = "success"
    CONFIG_ERROR = "config_error"
    IO_ERROR = "io_error"
    DATA_MISMATCH = "data_mismatch"
    EMPTY_DATASET = "empty_dataset"
    UNKNOWN_ERROR = "unknown_error"

    @property
    def exit_code(self) -> int:
        """Process exit code reported by the command-line interface."""
        return _EXIT_CODES[self]


_EXIT_CODES: dict[RunStatus, int] = {
    RunStatus.SUCCESS: 0,
    RunStatus.UNKNOWN_ERROR: 1,
    RunStatus.CONFIG_ERROR: 2,
    RunStatus.IO_ERROR: 3,
    RunStatus.DATA_MISMATCH: 4,
    RunStatus.EMPTY_DATASET: 5,
}
