"""Closed-form machinery for scalar linear SDEs.

The inhomogeneous linear Ito equation

    dX = (a1(t) X + a2(t)) dt + (b1(t) X + b2(t)) dW

has an explicit solution in terms of the homogeneous (exponential Brownian
motion) part H(t).  Coefficients are piecewise constant on a declared mesh so
that every time integral below is an exact finite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_NAMES = ("a1", "a2", "b1", "b2")


@dataclass(frozen=True)
class LinearSdeCoefficients:
    """Piecewise-constant (a1, a2, b1, b2) on the mesh ``knots``.

    Piece ``i`` covers ``[knots[i], knots[i+1])``.  Beyond the last knot the
    final piece is extended, so a two-knot mesh ``[t0, inf]`` is a constant
    coefficient set.
    """

    knots: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    _cum: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 1 or knots.size < 2:
            raise ValueError("knots must hold at least two points")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        m = knots.size - 1
        for name in _NAMES:
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (m,)).copy()
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"coefficient {name} is not finite on the horizon")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_cum", {})

    @classmethod
    def constant(cls, a1=0.0, a2=0.0, b1=0.0, b2=0.0, t0: float = 0.0) -> "LinearSdeCoefficients":
        return cls(np.array([t0, np.inf]), a1, a2, b1, b2)

    @classmethod
    def homogeneous(cls, a: float, b: float, t0: float = 0.0) -> "LinearSdeCoefficients":
        """Exponential Brownian motion dx = a x dt + b x dw."""
        return cls.constant(a1=a, b1=b, t0=t0)

    @classmethod
    def from_functions(
        cls,
        knots: Sequence[float],
        a1: Callable[[np.ndarray], np.ndarray] | float = 0.0,
        a2: Callable[[np.ndarray], np.ndarray] | float = 0.0,
        b1: Callable[[np.ndarray], np.ndarray] | float = 0.0,
        b2: Callable[[np.ndarray], np.ndarray] | float = 0.0,
    ) -> "LinearSdeCoefficients":
        """Freeze time-dependent coefficients at the left end of each piece."""
        knots = np.asarray(knots, dtype=float)
        left = knots[:-1]
        vals = [f(left) if callable(f) else np.full(left.size, float(f)) for f in (a1, a2, b1, b2)]
        return cls(knots, *vals)

    @property
    def t0(self) -> float:
        return float(self.knots[0])

    @property
    def is_homogeneous(self) -> bool:
        return not (np.any(self.a2) or np.any(self.b2))

    def _piece(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, t, side="right") - 1
        return np.clip(idx, 0, self.a1.size - 1)

    def at(self, t) -> tuple:
        """Coefficient values (a1, a2, b1, b2) in force at time ``t``."""
        i = self._piece(np.asarray(t, dtype=float))
        return self.a1[i], self.a2[i], self.b1[i], self.b2[i]

    def integral(self, values: np.ndarray, t) -> np.ndarray:
        """Exact integral from t0 to ``t`` of a piecewise-constant function."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0):
            raise ValueError("integration limit precedes t0")
        widths = np.diff(self.knots)
        finite = np.where(np.isfinite(widths), widths, 0.0)
        cum = np.concatenate([[0.0], np.cumsum(values * finite)])
        i = self._piece(t)
        return cum[i] + values[i] * (t - self.knots[i])

    def int_a1(self, t):
        return self.integral(self.a1, t)

    def int_b1_squared(self, t):
        return self.integral(self.b1**2, t)


@dataclass(frozen=True)
class CalibratedConstants:
    """Constant model parameters after smoothing.

    ``psi``/``phi`` are the annual index drift and volatility, ``xi``/``eta``
    the annual salary drift and volatility, ``lambda_contrib`` the fraction of
    salary contributed, and ``n_constituents`` the number of index members.
    The monthly pair is kept when the constants came from monthly data.
    """

    psi: float
    phi: float
    xi: float
    eta: float
    lambda_contrib: float = 0.1
    n_constituents: int = 500
    q_monthly: float | None = None
    r_monthly_vol: float | None = None

    def __post_init__(self) -> None:
        if self.phi < 0 or self.eta < 0:
            raise ValueError("volatilities must be non-negative")
        if not 0 <= self.lambda_contrib < 1:
            raise ValueError("contribution fraction must lie in [0, 1)")
        if self.n_constituents < 1:
            raise ValueError("n_constituents must be >= 1")
        if self.q_monthly is not None and self.r_monthly_vol is not None:
            psi, phi = rescale_monthly_to_annual(self.q_monthly, self.r_monthly_vol)
            if not (math.isclose(psi, self.psi, rel_tol=1e-9, abs_tol=1e-12)
                    and math.isclose(phi, self.phi, rel_tol=1e-9, abs_tol=1e-12)):
                raise ValueError("annual and monthly constants disagree")

    @classmethod
    def paper_defaults(cls) -> "CalibratedConstants":
        """Published calibration: S&P500 returns 1970-2011 and PSID wages."""
        return cls(
            psi=0.0329,
            phi=0.3464,
            xi=-0.0328,
            eta=math.sqrt(1.0 / 6.0),
            lambda_contrib=0.1,
            n_constituents=500,
        )

    def replace(self, **changes) -> "CalibratedConstants":
        from dataclasses import replace

        if ("psi" in changes or "phi" in changes) and not {"q_monthly", "r_monthly_vol"} & changes.keys():
            changes.setdefault("q_monthly", None)
            changes.setdefault("r_monthly_vol", None)
        return replace(self, **changes)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def lognormal_moment(x0: float, coeffs: LinearSdeCoefficients, t: float, k: float) -> float:
    """k-th moment of exponential Brownian motion at time t (k > 0 real)."""
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    if k <= 0:
        raise ValueError("moment order must be positive")
    if t < coeffs.t0:
        raise ValueError("t precedes the coefficient origin")
    ia = float(coeffs.int_a1(t))
    ib = float(coeffs.int_b1_squared(t))
    expo = k * ia + 0.5 * (k * k - k) * ib
    if not math.isfinite(expo):
        raise ValueError("coefficient integral is not finite")
    return x0**k * math.exp(expo)


def lognormal_mean_var(x0: float, coeffs: LinearSdeCoefficients, t: float) -> tuple[float, float]:
    """Mean and variance of exponential Brownian motion, written out directly."""
    ia = float(coeffs.int_a1(t))
    ib = float(coeffs.int_b1_squared(t))
    mean = x0 * math.exp(ia)
    var = x0**2 * math.exp(2 * ia) * math.expm1(ib)
    return mean, var


def solve_linear_sde_path(
    coeffs: LinearSdeCoefficients,
    x0: float,
    noise: np.ndarray,
    times: np.ndarray,
) -> np.ndarray:
    """Evaluate the explicit solution along one Brownian path.

    ``noise`` holds the increments W(times[i+1]) - W(times[i]).  The
    homogeneous factor H uses exact drift integrals; the correction integrals
    of the inhomogeneous part use left-point (Ito) sums.  The returned array
    has one value per entry of ``times``.
    """
    times = np.asarray(times, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-D grid")
    dt = np.diff(times)
    if np.any(dt <= 0):
        raise ValueError("times must be strictly increasing")
    if noise.shape != dt.shape:
        raise ValueError("need exactly one noise increment per grid step")
    if x0 == 0:
        raise ValueError("x0 = 0 makes the homogeneous factor vanish")

    a1, a2, b1, b2 = coeffs.at(times[:-1])
    drift_int = np.diff(coeffs.int_a1(times) - 0.5 * coeffs.int_b1_squared(times))
    log_h = np.concatenate([[0.0], np.cumsum(drift_int + b1 * noise)])
    h = x0 * np.exp(log_h)
    if not np.all(np.isfinite(h)) or np.any(h == 0):
        raise ValueError("homogeneous factor degenerated; coefficients are corrupt")
    if coeffs.is_homogeneous:
        return h
    hl = h[:-1]
    corr = np.concatenate([[0.0], np.cumsum((a2 - b1 * b2) / hl * dt + b2 / hl * noise)])
    return h * (1.0 + corr)


def rescale_monthly_to_annual(q: float, r_vol: float) -> tuple[float, float]:
    """Convert a monthly drift/volatility pair to annual units."""
    if r_vol < 0:
        raise ValueError("volatility must be non-negative")
    return 12.0 * q, math.sqrt(12.0) * r_vol
