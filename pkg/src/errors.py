class DecayLabError(Exception):
    """
    Base class for every failure the laboratory reports.

    Attributes:
        exit_code (int): The CLI exit status this failure maps to.
    """

    exit_code = 1


class ConfigurationError(DecayLabError):
    """Malformed, incomplete or inconsistent run configuration."""

    exit_code = 1


class GridMismatchError(DecayLabError):
    """A field does not live on the grid it is used with."""

    exit_code = 1


class FactorizationError(DecayLabError):
    """The (I + L_h) factorization failed. Cannot happen for valid grids."""

    exit_code = 1


class ProvenanceError(DecayLabError):
    """A trace and a ledger were built from different inputs."""

    exit_code = 1


class PotentialValidationError(DecayLabError):
    """The potential violates |V'| <= alpha V or the smallness condition."""

    exit_code = 2


class InequalityFailure(DecayLabError):
    """At least one verified inequality has a negative margin."""

    exit_code = 3


class IntegrationBlowupError(DecayLabError):
    """
    The time integrator produced a non-finite state.

    Attributes:
        t (float): The time at which the non-finite state was detected.
    """

    exit_code = 4

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"Non-finite state detected at t = {t:.6g}")


class OutputError(DecayLabError):
    """Reading or writing a result file failed."""

    exit_code = 5
