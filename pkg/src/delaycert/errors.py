"""Exception hierarchy shared by all modules."""


class DelayCertError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DelayCertError):
    """Malformed system description or inconsistent options."""


class ExpressionSyntaxError(ConfigError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationOverflow(DelayCertError):
    """exp(p*theta) leaves the double-precision range on the delay interval."""


class SingularAtP(DelayCertError):
    """alpha(p) - pI is numerically singular: p is (close to) a characteristic root."""

    def __init__(self, p, rcond):
        super().__init__(f"alpha(p) - pI singular at p={p!r} (1/cond={rcond:.3e})")
        self.p = p
        self.rcond = rcond


class RootOnLine(DelayCertError):
    def __init__(self, nu, location, modulus):
        super().__init__(
            f"characteristic root on Re p = {-nu!r} near p={location!r} "
            f"(|det|={modulus:.3e}); perturb nu")
        self.nu = nu
        self.location = location
        self.modulus = modulus


class NonIntegerWinding(DelayCertError):
    def __init__(self, value, residual):
        super().__init__(f"winding number {value!r} is not an integer (residual {residual:.3f})")
        self.value = value
        self.residual = residual


class TailBoundError(DelayCertError):
    """The cutoff frequency is too small for the Neumann-series tail bound."""

    def __init__(self, omega, minimal):
        super().__init__(f"cutoff {omega!r} must exceed {minimal!r}")
        self.omega = omega
        self.minimal = minimal


class TailUnbounded(DelayCertError):
    """No admissible cutoff makes the tail bound negative."""


class NonFiniteState(DelayCertError):
    def __init__(self, time):
        super().__init__(f"state became non-finite at t={time!r}")
        self.time = time


class DifferenceUnderflow(DelayCertError):
    """Trajectories merged before the fitting window started."""

    def __init__(self, time):
        super().__init__(f"trajectory difference underflowed at t={time!r}")
        self.time = time
