"""Exception types and warning categories shared across the package."""


class QdnlsError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(QdnlsError):
    """Invalid parameters, states, or configuration."""


class CapacityError(QdnlsError):
    """A requested basis or matrix exceeds the configured size cap."""


class ResonanceError(QdnlsError):
    """A perturbative energy denominator is at or below the resonance floor."""

    def __init__(self, denominator, value):
        self.denominator = denominator
        self.value = value
        super().__init__(
            f"resonant parameters: denominator {denominator} = {value:.6g} "
            "is below the resonance floor"
        )


class NumericalError(QdnlsError):
    """A numerical routine failed its accuracy contract."""


class BandOverlapError(QdnlsError):
    """Fewer band states were found than expected; another band interleaves."""


class ResonanceWarning(UserWarning):
    """Perturbative denominators are small compared to the hopping strength."""


class PTValidityWarning(UserWarning):
    """Perturbation theory evaluated outside its comfortable regime."""
