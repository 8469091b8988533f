"""Exception types shared across the package."""


class DDLAError(Exception):
    pass


class FrozenClusterError(DDLAError):
    """Raised when a cluster has zero total activity and cannot grow."""


class RejectionOverflowError(DDLAError):
    """Raised when a rejection sampler exceeds its attempt cap."""


class WindowBreachError(DDLAError):
    """Raised when a colored run reaches the lateral boundary of its strip.

    The run result must be discarded; callers should enlarge the window.
    """

    def __init__(self, site, time, window):
        super().__init__(
            f"red area reached {site} at t={time:.6g} within 2 sites of the "
            f"lateral boundary (window {window})"
        )
        self.site = site
        self.time = time
        self.window = window


class SnapshotFormatError(DDLAError):
    """Raised on malformed snapshot/trace files; carries a line number."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno
