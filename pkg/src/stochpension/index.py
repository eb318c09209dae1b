"""Equal-weight index model and its single-lognormal (Fenton-Wilkinson) proxy.

An index of n i.i.d. exponential Brownian motions is replaced by one
exponential Brownian motion Z_n whose mean and variance match the index
average at every time.  Matching the variance gives the time-dependent
squared volatility

    Phi^2(t) = phi^2 e^{phi^2 t} / (e^{phi^2 t} + n - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CalibratedConstants, LinearSdeCoefficients


@dataclass(frozen=True)
class WeightScheme:
    """Power-law index weights i**alpha / sum(i**alpha), i = 1..n."""

    n: int
    alpha: float = 18.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")

    @property
    def weights(self) -> np.ndarray:
        # scaled by n**alpha to stay finite for large exponents
        w = (np.arange(1, self.n + 1) / self.n) ** self.alpha
        return w / w.sum()


@dataclass(frozen=True)
class LlnReport:
    sum_squares: float
    asymptotic: float
    ratio: float


def weight_sum_squares(scheme: WeightScheme) -> LlnReport:
    """Exact sum of squared weights against its large-n estimate."""
    exact = float(np.sum(scheme.weights**2))
    a = scheme.alpha
    asym = (a + 1) ** 2 / ((2 * a + 1) * scheme.n)
    return LlnReport(exact, asym, exact / asym)


@dataclass(frozen=True)
class FwApproximation:
    psi: float
    phi: float
    n: int = 500

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.phi < 0:
            raise ValueError("phi must be non-negative")

    @classmethod
    def from_constants(cls, constants: CalibratedConstants) -> "FwApproximation":
        return cls(constants.psi, constants.phi, constants.n_constituents)

    def phi_squared(self, t):
        return fw_phi_squared(self, t)

    def integrated_phi_squared(self, t):
        """Closed form of the integral of Phi^2 from 0 to t."""
        t = np.asarray(t, dtype=float)
        p2 = self.phi**2
        return np.log((np.exp(p2 * t) + self.n - 1) / self.n)

    def coefficients(self, knots) -> LinearSdeCoefficients:
        """Piecewise-constant coefficients of Z_n frozen on ``knots``.

        Each piece carries the exact average of Phi^2 over the piece, so the
        integrated variance is exact on the mesh.
        """
        knots = np.asarray(knots, dtype=float)
        ip = self.integrated_phi_squared(knots)
        avg = np.diff(ip) / np.diff(knots)
        return LinearSdeCoefficients(knots, self.psi, 0.0, np.sqrt(avg), 0.0)


def fw_phi_squared(fw: FwApproximation, t):
    """Time-dependent squared volatility of the matched process."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    p2 = fw.phi**2
    # divide through by e^{p2 t} to avoid overflow at long horizons
    out = p2 / (1.0 + (fw.n - 1) * np.exp(-p2 * t))
    return float(out) if out.ndim == 0 else out


def zn_law(fw: FwApproximation, x0: float, t: float) -> tuple[float, float]:
    """Mean and variance of Z_n(t); equal to those of the index average."""
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    if t < 0:
        raise ValueError("t must be >= 0")
    mean = x0 * math.exp(fw.psi * t)
    var = x0**2 / fw.n * math.exp(2 * fw.psi * t) * math.expm1(fw.phi**2 * t)
    return mean, var
