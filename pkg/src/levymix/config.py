"""Default numerical tolerances, overridable per call."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """One record of the numerical thresholds used across the package.

    cluster_tol drives both eigenvalue clustering and the singular-value
    threshold in rank decisions; unit_tol decides when a modulus counts
    as 1; reconstruction_tol bounds the relative residual of a Jordan
    decomposition; det_tol is the |det| = 1 membership slack.
    """

    cluster_tol: float = 1e-6
    unit_tol: float = 1e-8
    reconstruction_tol: float = 1e-6
    det_tol: float = 1e-8


DEFAULT_TOLS = Tolerances()
