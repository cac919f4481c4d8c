"""Exception hierarchy.

Each class carries the CLI exit code of its category so the command-line
front end can map failures without a lookup table.
"""


class LocTimeError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigurationError(LocTimeError, ValueError):
    """Invalid grid, seed, experiment or file configuration."""

    exit_code = 2


class AlignmentError(LocTimeError, ValueError):
    """A regularization width is not an integer multiple of the grid step."""

    exit_code = 3


class SimulationBlowupError(LocTimeError, FloatingPointError):
    """A simulated path produced a non-finite value.

    Attributes
    ----------
    step : int
        Index of the first grid point holding a non-finite value.
    stream_index : int or None
        RNG substream of the offending path, when known.
    """

    exit_code = 1

    def __init__(self, step, stream_index=None, message=None):
        self.step = int(step)
        self.stream_index = stream_index
        if message is None:
            message = f"non-finite value at step {self.step}"
            if stream_index is not None:
                message += f" (stream {stream_index})"
        super().__init__(message)


class DegenerateFitError(LocTimeError, ValueError):
    """Rate fit requested on too few rungs or on non-positive errors."""

    exit_code = 1


class AcceptanceError(LocTimeError):
    """Raised by the CLI when ``--enforce`` is given and a pass flag is false."""

    exit_code = 5
