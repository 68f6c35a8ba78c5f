"""Dense complex spectra of damped stochastic matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .google_matrix import GoogleMatrix, StochasticMatrix, build_google

MAX_DENSE_N = 5000
ALPHA_SCALING_TOL = 1e-8


class ScalingMismatchError(RuntimeError):
    """Damped spectrum deviates from the rescaled undamped spectrum."""


@dataclass(frozen=True)
class Spectrum:
    """Complex eigenvalues in a fixed total order.

    Sorted by descending modulus, then descending real part, then
    descending imaginary part, so repeated runs emit identical files.
    """

    eigenvalues: np.ndarray
    alpha: float
    year: int | None = None
    commodity: str | None = None

    def __post_init__(self) -> None:
        ev = np.array(self.eigenvalues, dtype=complex)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def leading(self) -> complex:
        return complex(self.eigenvalues[0])


def _sorted_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(matrix)
    return ev[np.lexsort((-ev.imag, -ev.real, -np.abs(ev)))]


def full_spectrum(
    g: GoogleMatrix, year: int | None = None, commodity: str | None = None
) -> Spectrum:
    """All eigenvalues of the damped matrix via the dense solver."""
    if g.n > MAX_DENSE_N:
        raise ValueError(
            f"matrix size {g.n} exceeds the dense-spectrum limit {MAX_DENSE_N}"
        )
    return Spectrum(_sorted_eigenvalues(g.effective()), g.alpha, year, commodity)


@dataclass(frozen=True)
class ScalingReport:
    alpha: float
    max_mismatch: float
    tolerance: float


def verify_alpha_scaling(
    s: StochasticMatrix, alpha: float, tolerance: float = ALPHA_SCALING_TOL
) -> ScalingReport:
    """Check that damping rescales the spectrum: {1} plus alpha times the rest.

    The damped matrix must have eigenvalue 1 together with alpha * lambda_i
    for every non-leading eigenvalue lambda_i of the undamped matrix.
    Predicted and computed spectra are matched greedily by nearest pair;
    a worst gap above tolerance raises ScalingMismatchError.
    """
    base = _sorted_eigenvalues(s.columns)
    predicted = np.concatenate(([1.0 + 0.0j], alpha * base[1:]))
    damped = _sorted_eigenvalues(build_google(s, alpha).effective())
    alive = np.ones(damped.size, dtype=bool)
    worst = 0.0
    for p in predicted:
        gaps = np.abs(damped - p)
        gaps[~alive] = np.inf
        best = int(np.argmin(gaps))
        worst = max(worst, float(gaps[best]))
        alive[best] = False
    if worst > tolerance:
        raise ScalingMismatchError(
            f"damped spectrum deviates from the rescaled undamped spectrum "
            f"by {worst:.3e} (tolerance {tolerance:.1e})"
        )
    return ScalingReport(alpha, worst, tolerance)


def detect_quasi_degenerate(
    spectrum: Spectrum, gap_threshold: float = 0.01
) -> np.ndarray:
    """Eigenvalues with modulus above 1 - gap_threshold, in spectrum order.

    Only meaningful without damping, so the spectrum's alpha must be
    exactly 1; a cluster of such eigenvalues signals weakly coupled
    subnetworks that relax slowly.
    """
    if spectrum.alpha != 1.0:
        raise ValueError("quasi-degeneracy detection requires an alpha = 1 spectrum")
    if not 0.0 < gap_threshold < 1.0:
        raise ValueError("gap_threshold must be in (0, 1)")
    ev = spectrum.eigenvalues
    return ev[np.abs(ev) > 1.0 - gap_threshold]
