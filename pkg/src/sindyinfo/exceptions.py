"""Exception types raised across the package."""

import numpy as np


class IntegrationDivergedError(RuntimeError):
    """A trajectory produced a non-finite state.

    ``last_valid_time`` is the time of the last finite sample, and
    ``partial`` optionally holds whatever was collected before the failure.
    """

    def __init__(self, message, last_valid_time, partial=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time
        self.partial = partial


class SingularSystemError(np.linalg.LinAlgError):
    """Normal equations are not positive definite."""


class UnboundedAxisError(ValueError):
    """A confidence ellipsoid has an infinite semi-axis (zero eigenvalue)."""


class OscillationNotFoundError(ValueError):
    """No complete oscillation could be located in a trajectory."""


class UndefinedEntropyWarning(RuntimeWarning):
    """Sample entropy has no template matches and is reported as NaN."""


class EmptySupportWarning(RuntimeWarning):
    """Sequential thresholding removed every term of an equation."""
