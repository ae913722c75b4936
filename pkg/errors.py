"""Error types shared by the toolkit modules"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


class UsageError(ToolkitError, ValueError):
    """Invalid request: mismatched carriers, unknown names, violated preconditions"""


class ClosureCapExceeded(ToolkitError, RuntimeError):
    """Closure generation produced more elements than allowed"""

    def __init__(self, partial_size: int, cap: int):
        super().__init__(f"Closure exceeds cap {cap} (reached {partial_size} elements)")
        self.partial_size = partial_size
        self.cap = cap


class InconclusiveError(ToolkitError):
    """A question could not be decided within the truncation horizon"""


class DegenerateModuleError(ToolkitError):
    """A module computation hit an inner product with discontinuous attainment"""
