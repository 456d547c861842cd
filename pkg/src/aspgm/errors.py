"""Exception types shared across the package."""


class AspgmError(Exception):
    pass


class IllConditionedMemory(AspgmError):
    """The compact L-BFGS middle matrix could not be factorized reliably."""


class NonFiniteOracle(AspgmError):
    """The objective returned NaN or infinite values."""

    def __init__(self, x, f):
        super().__init__(f"oracle returned non-finite output (f={f!r})")
        self.x = x
        self.f = f


class ShapeMismatch(AspgmError, ValueError):
    pass


class EmptyBundle(AspgmError):
    """No memory entry has a positive induction weight."""


class MalformedLine(AspgmError, ValueError):
    def __init__(self, lineno, line, reason=""):
        msg = f"line {lineno}: malformed LIBSVM record"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.lineno = lineno
        self.line = line


class EmptyFile(AspgmError, ValueError):
    pass


class ConfigError(AspgmError, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
