"""Exception types shared across the package."""


class OptomulError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OptomulError, ValueError):
    """Invalid parameters: shape/pitch mismatch, out-of-range coordinates, bad specs."""


class MetricError(OptomulError, ValueError):
    """A quality metric is undefined for the given inputs (e.g. zero variance)."""


class DetectionError(OptomulError, ValueError):
    """Detector readout cannot be computed (e.g. dark image with nonzero expectation)."""


class UnsupportedModulusError(OptomulError, ValueError):
    """Modulus outside the supported domain (must be odd and >= 3)."""


class ScriptParseError(OptomulError, ValueError):
    """Instruction file is malformed. Carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ScriptExecutionError(OptomulError, RuntimeError):
    """Instruction file failed at run time. Carries the step index."""

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
