"""Exception hierarchy shared by every module of the package."""


class RouterError(Exception):
    """Base class for all errors raised by :mod:`crw_router`."""

    #: short machine-readable code used in sweep ``reason`` columns
    code = "error"


class ViolatedInvariant(RouterError, ValueError):
    code = "violated_invariant"

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class OutOfBand(RouterError, ValueError):
    """The energy lies outside (or on the edge of) a waveguide band."""

    code = "out_of_band"

    def __init__(self, E, omega=None, xi=None):
        self.E = E
        msg = f"E={E!r} is not strictly inside the band"
        if omega is not None and xi is not None:
            msg += f" ({omega - 2 * xi!r}, {omega + 2 * xi!r})"
        super().__init__(msg)


class NotSymmetric(RouterError, ValueError):
    code = "not_symmetric"


class NearPole(RouterError, ArithmeticError):
    """A denominator polynomial nearly vanishes at the requested energy."""

    code = "near_pole"


class ComplexRoot(RouterError, ArithmeticError):
    code = "complex_root"


class SingularSystem(RouterError, ArithmeticError):
    code = "singular_system"


class EngineMismatch(RouterError, ValueError):
    code = "engine_mismatch"


class NormDrift(RouterError, ArithmeticError):
    code = "norm_drift"


class PacketNotCleared(RouterError, RuntimeError):
    code = "packet_not_cleared"


class ConfigError(RouterError, ValueError):
    """Malformed configuration; ``line`` is 1-based when known."""

    code = "config_error"

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)
