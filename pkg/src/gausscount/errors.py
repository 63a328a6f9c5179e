"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Inputs have inconsistent or unsupported dimensions."""


class InvalidCovarianceError(ValueError):
    """A covariance matrix violates the quantum uncertainty constraint."""


class InvalidChannelError(ValueError):
    """A channel matrix pair violates the channel positivity constraint."""


class InvalidUnitaryError(ValueError):
    """A 2x2 unitary parameterisation is not normalised."""


class SpectralPairingError(ValueError):
    """A pure-state spectrum cannot be paired into reciprocal eigenvalues."""


class TruncationRiskError(RuntimeError):
    """A truncated-basis computation would push significant mass off the edge."""


class IncompleteRecordsError(ValueError):
    """A solver is missing measurement records; lists the absent descriptors."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(
            "missing measurement records for descriptors: "
            + ", ".join(str(d) for d in self.missing)
        )
