"""Exception types shared across the package."""


class LeadoptError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LeadoptError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularMatrix(LeadoptError):
    def __init__(self, message, smallest_pivot=None):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class NonFiniteValue(LeadoptError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DivergenceError(LeadoptError):
    """A simulated worker left the finite region (norm guard tripped)."""

    def __init__(self, message, worker=None, event_index=None):
        super().__init__(message)
        self.worker = worker
        self.event_index = event_index


class SpecParseError(LeadoptError):
    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
