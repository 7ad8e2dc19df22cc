"""Exception types raised by the simulator."""


class PvPmsError(Exception):
    """Base class for all simulator errors."""


class NonConvergence(PvPmsError):
    """An iterative solver ran out of steps or found no root."""


class DutyOutOfRange(PvPmsError, ValueError):
    """Duty cycle outside the converter's usable range."""


class SingularFit(PvPmsError):
    """Fit data cannot constrain the requested parameters."""


class Unreachable(PvPmsError):
    """A requested target lies outside what the model can produce."""

    def __init__(self, message, *, target=None, hour=None):
        super().__init__(message)
        self.target = target
        self.hour = hour


class GridMismatch(PvPmsError, ValueError):
    """Two day results do not share the same time grid."""


class DegenerateSeries(PvPmsError, ValueError):
    """A series has zero variance where a statistic needs spread."""


class SampleError(PvPmsError):
    """A model error raised while simulating one sample of a day."""

    def __init__(self, index, t_min, cause):
        super().__init__(f"sample {index} (t={t_min} min): {cause}")
        self.index = index
        self.t_min = t_min
        self.cause = cause


class ConfigError(PvPmsError):
    """Invalid run configuration; carries the offending line and key."""

    def __init__(self, message, *, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
