"""Implicit finite-difference solvers for the accumulation and consumption
Fokker-Planck equations.

Both solvers use the conservative flux form with central differences.  For
a node line with drift A and diffusion D (the equation reads
dp/dt = -d/dx[A p] + 1/2 d^2/dx^2[D p]) the flux through the face between
nodes j and j+1 is

    F = (A_j p_j + A_{j+1} p_{j+1}) / 2 - (D_{j+1} p_{j+1} - D_j p_j) / (2h).

Where the central weights would make the implicit matrix lose its
M-matrix property (cell Peclet number |A| h / D above 1) the advective
weights w A_j p_j + (1 - w) A_{j+1} p_{j+1} shift from w = 1/2 just far
enough to restore it, which keeps the density non-negative with the least
added numerical diffusion.  Faces whose nodes flow apart use flux
splitting, max(A_j, 0) p_j + min(A_{j+1}, 0) p_{j+1}.

At a zero-value (absorbing) wall the advective part of the wall flux is
upwinded: outflow carries the full interior value, inflow carries the wall
value 0.  This keeps the total mass non-increasing.  A closed wall has zero
flux.  Time stepping is backward Euler; in 2-D the v and s directions are
split (Lie splitting), each sweep a block of independent tridiagonal lines
solved in one banded factorization.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg.lapack import dgtsv
from scipy.special import log_ndtr

from .index import FwApproximation, fw_phi_squared
from .model import CalibratedConstants

NEG_TOL = 1e-10
# densities below TINY are dropped after every step
TINY = 1e-200
# added to right-hand sides so exact zeros do not decay through the
# subnormal range inside LAPACK, which runs several times slower there
RHS_FLOOR = 1e-300

ABSORBING = "absorbing"
CLOSED = "closed"


class FpeSolveError(RuntimeError):
    pass


class HorizonWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Nodes x_j = j dx, j = 0..n, and time step dk."""

    dx: float = 0.0005
    n: int = 24000
    dk: float = 0.0025

    def __post_init__(self) -> None:
        if self.dx <= 0 or self.dk <= 0:
            raise ValueError("spacings must be positive")
        if self.n < 3:
            raise ValueError("need at least 3 intervals")

    @classmethod
    def coarse(cls) -> "Grid1D":
        """dx = dk = 0.01 on [0, 12]."""
        return cls(0.01, 1200, 0.01)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dx

    @property
    def x_max(self) -> float:
        return self.n * self.dx

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Grid2D:
    """Nodes (v_j, s_l) = (j dh, l dm), j = 0..n_v, l = 0..n_s."""

    dh: float = 0.0125
    n_v: int = 1440
    dm: float = 0.05
    n_s: int = 100
    dk: float = 0.05

    def __post_init__(self) -> None:
        if min(self.dh, self.dm, self.dk) <= 0:
            raise ValueError("spacings must be positive")
        if min(self.n_v, self.n_s) < 3:
            raise ValueError("need at least 3 intervals per axis")

    @classmethod
    def table_grid(cls) -> "Grid2D":
        """The coarse 720 x 25 grid with time step 0.1 (domain 18 x 5)."""
        return cls(0.025, 720, 0.2, 25, 0.1)

    @property
    def v(self) -> np.ndarray:
        return np.arange(self.n_v + 1) * self.dh

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n_s + 1) * self.dm

    @property
    def extent(self) -> tuple[float, float]:
        return self.n_v * self.dh, self.n_s * self.dm

    def refined(self, factor: int = 2) -> "Grid2D":
        """Spacings and time step divided by ``factor``, same domain."""
        return Grid2D(self.dh / factor, self.n_v * factor, self.dm / factor, self.n_s * factor, self.dk / factor)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DensityField:
    grid: Grid1D | Grid2D
    values: np.ndarray
    t: float
    initial_mass: float = 1.0

    @property
    def dims(self) -> int:
        return self.values.ndim

    def clipped(self) -> np.ndarray:
        return np.maximum(self.values, 0.0)

    @property
    def mass(self) -> float:
        return _mass(self.grid, self.values)


def _mass(grid, p: np.ndarray) -> float:
    if isinstance(grid, Grid1D):
        return float(np.trapezoid(p, dx=grid.dx))
    return float(np.trapezoid(np.trapezoid(p, dx=grid.dm, axis=1), dx=grid.dh))


def _gauss(x: np.ndarray, c: float, sig: float) -> np.ndarray:
    return np.exp(-0.5 * ((x - c) / sig) ** 2)


def _check_ball(c: float, sig: float, hi: float, axis: str) -> None:
    if sig <= 0:
        raise ValueError("sigma must be positive")
    if c - 6 * sig < 0 or c + 6 * sig > hi:
        raise ValueError(f"initial density centre {c} is within 6 sigma of the {axis} boundary")


def initial_density(grid, center, sigmas) -> DensityField:
    """Gaussian approximation of a point mass, unit mass on the grid."""
    if isinstance(grid, Grid1D):
        c = float(center)
        sig = float(np.atleast_1d(sigmas)[0])
        _check_ball(c, sig, grid.x_max, "x")
        p = _gauss(grid.x, c, sig)
        p[0] = p[-1] = 0.0
    else:
        (cv, cs), (sv, ss) = center, sigmas
        vmax, smax = grid.extent
        _check_ball(cv, sv, vmax, "v")
        _check_ball(cs, ss, smax, "s")
        p = np.outer(_gauss(grid.v, cv, sv), _gauss(grid.s, cs, ss))
        p[0, :] = p[-1, :] = 0.0
        p[:, 0] = p[:, -1] = 0.0
    p /= _mass(grid, p)
    return DensityField(grid, p, 0.0, 1.0)


def _line_operator(A: np.ndarray, D: np.ndarray, h: float, dk: float, left: str, right: str):
    """Tridiagonal bands of (I - dk L) on the interior nodes of each line.

    ``A`` and ``D`` hold node values, shape (lines, N+1).  Returns
    (lower, diag, upper), each of shape (lines, N-1); lower[:, 0] and
    upper[:, -1] are zero.
    """
    Al, Ar, Dl, Dr = A[:, :-1], A[:, 1:], D[:, :-1], D[:, 1:]
    # advective weight w on the left node; central is w = 1/2.  Move w only
    # as far as the M-matrix sign conditions require (least added diffusion).
    w = np.full(Al.shape, 0.5)
    fwd = Ar * h > Dr
    back = -Al * h > Dl
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(fwd, 1.0 - Dr / (2 * h * Ar), w)
        w = np.where(back & ~fwd, Dl / (2 * h * np.abs(Al)), w)
    cl = w * Al + Dl / (2 * h)
    cr = (1.0 - w) * Ar - Dr / (2 * h)
    # faces where the two nodes flow apart fall back to flux splitting
    bad = (back & fwd) | (cl < 0) | (cr > 0)
    if bad.any():
        cl = np.where(bad, np.maximum(Al, 0.0) + Dl / (2 * h), cl)
        cr = np.where(bad, np.minimum(Ar, 0.0) - Dr / (2 * h), cr)
    if left == CLOSED:
        cr[:, 0] = 0.0
    else:
        cr[:, 0] = np.minimum(A[:, 1], 0.0) - D[:, 1] / (2 * h)
    if right == CLOSED:
        cl[:, -1] = 0.0
    else:
        cl[:, -1] = np.maximum(A[:, -2], 0.0) + D[:, -2] / (2 * h)
    r = dk / h
    diag = 1.0 + r * (cl[:, 1:] - cr[:, :-1])
    upper = r * cr[:, 1:]
    lower = -r * cl[:, :-1]
    upper[:, -1] = 0.0
    lower[:, 0] = 0.0
    return lower, diag, upper


def _solve_lines(lower, diag, upper, rhs, where: str) -> np.ndarray:
    """Solve all lines at once as one block-diagonal tridiagonal system."""
    shape = rhs.shape
    _, _, _, x, info = dgtsv(lower.ravel()[1:], diag.ravel(), upper.ravel()[:-1], rhs.ravel() + RHS_FLOOR)
    if info != 0:
        raise FpeSolveError(f"{where}: tridiagonal solve failed (LAPACK info={info})")
    if not np.isfinite(x.sum()):
        raise FpeSolveError(f"{where}: tridiagonal solve produced non-finite values")
    return x.reshape(shape)


def _flush(p: np.ndarray) -> None:
    p[np.abs(p) < TINY] = 0.0


def _peclet(A: np.ndarray, D: np.ndarray, h: float) -> float:
    """Largest cell Peclet number |A| h / D over interior nodes.

    Values above 1 mean the face leans its advective weights upwind.
    """
    A, D = A[:, 1:-1], D[:, 1:-1]
    if np.any((D <= 0) & (A != 0)):
        return math.inf
    pos = D > 0
    return float(np.max(np.abs(A[pos]) * h / D[pos])) if pos.any() else 0.0


def _checkpoint_steps(times, dk: float, n_steps: int) -> dict[int, float]:
    out = {}
    for t in times:
        k = int(round(t / dk))
        if abs(k * dk - t) > 1e-9 * max(1.0, t) or k < 0 or k > n_steps:
            raise ValueError(f"checkpoint {t} is not on the time grid")
        out[k] = float(t)
    return out


@dataclass
class FpeResult:
    """Solution history: mass after every step and fields at checkpoints."""

    times: np.ndarray
    mass: np.ndarray
    checkpoints: dict[float, DensityField]
    grid: Grid1D | Grid2D
    diagnostics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def field_at(self, t: float) -> DensityField:
        for k, f in self.checkpoints.items():
            if abs(k - t) <= 1e-9 * max(1.0, t):
                return f
        raise KeyError(f"no checkpoint at t={t}")

    @property
    def final(self) -> DensityField:
        return self.checkpoints[max(self.checkpoints)]


def _finish_diagnostics(mass: np.ndarray, min_value: float, neg_steps: int, peclet: float) -> dict:
    inc = np.diff(mass)
    return {
        "initial_mass": float(mass[0]),
        "final_mass": float(mass[-1]),
        "leak": float(mass[0] - mass[-1]),
        "max_mass_increase": float(max(inc.max(initial=0.0), 0.0)),
        "mass_nonincreasing": bool(np.all(inc <= 1e-13 * mass[0])),
        "min_value": float(min_value),
        "undershoot": bool(min_value < -NEG_TOL),
        "undershoot_steps": int(neg_steps),
        "max_cell_peclet": peclet,
    }


def solve_fpe_2d(
    constants: CalibratedConstants,
    grid: Grid2D,
    ic: DensityField,
    horizon: float,
    checkpoints=None,
    phi_offset: float = 0.0,
    origin_edges: str = CLOSED,
) -> FpeResult:
    """Joint density of fund growth v and salary growth s.

    dp/dt = -d_v[(psi v + Lambda s) p] - d_s[xi s p]
            + 1/2 d_s^2[eta^2 s^2 p] + 1/2 d_v^2[Phi^2(t) v^2 p]

    The far edges v = v_max and s = s_max hold p = 0 and absorb.  The
    edges v = 0 and s = 0 are closed by default (``origin_edges="closed"``)
    because neither process can reach 0; ``"absorbing"`` treats them like
    the far edges.  Phi^2 is evaluated at the end of each step.
    """
    if not isinstance(grid, Grid2D) or ic.values.shape != (grid.n_v + 1, grid.n_s + 1):
        raise ValueError("initial density does not match the grid")
    if origin_edges not in (CLOSED, ABSORBING):
        raise ValueError("origin_edges must be 'closed' or 'absorbing'")
    fw = FwApproximation.from_constants(constants)
    dk = grid.dk
    n_steps = int(round(horizon / dk))
    if n_steps < 1 or abs(n_steps * dk - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError("horizon must be a positive multiple of the time step")
    cps = _checkpoint_steps([horizon] if checkpoints is None else checkpoints, dk, n_steps)

    v, s = grid.v, grid.s
    psi, lam, xi, eta = constants.psi, constants.lambda_contrib, constants.xi, constants.eta
    # v-lines: one per interior s node; s-lines: one per interior v node
    a_v = psi * v[None, :] + lam * s[1:-1, None]
    a_s = np.broadcast_to(xi * s, (grid.n_v - 1, s.size))
    d_s = np.broadcast_to(eta**2 * s**2, (grid.n_v - 1, s.size))
    s_ops = _line_operator(a_s, d_s, grid.dm, dk, origin_edges, ABSORBING)
    v2 = np.broadcast_to(v**2, a_v.shape)

    p = ic.values.copy()
    mass = np.empty(n_steps + 1)
    mass[0] = _mass(grid, p)
    out = {}
    if 0 in cps:
        out[cps[0]] = DensityField(grid, p.copy(), 0.0, mass[0])
    min_value = float(p.min())
    neg_steps = 0
    peclet = max(_peclet(a_s[:1], d_s[:1], grid.dm), 0.0)
    for k in range(n_steps):
        t = (k + 1) * dk
        phi2 = fw_phi_squared(fw, phi_offset + t)
        d_v = phi2 * v2
        if k == 0 or k == n_steps - 1:
            peclet = max(peclet, _peclet(a_v, d_v, grid.dh))
        lo, di, up = _line_operator(a_v, d_v, grid.dh, dk, origin_edges, ABSORBING)
        inner = p[1:-1, 1:-1]
        star = _solve_lines(lo, di, up, np.ascontiguousarray(inner.T), f"v sweep, t={t:g}").T
        p[1:-1, 1:-1] = _solve_lines(*s_ops, np.ascontiguousarray(star), f"s sweep, t={t:g}")
        _flush(p)
        mass[k + 1] = _mass(grid, p)
        m = float(p.min())
        if m < -NEG_TOL:
            neg_steps += 1
        min_value = min(min_value, m)
        if k + 1 in cps:
            out[cps[k + 1]] = DensityField(grid, p.copy(), t, mass[0])

    diag = _finish_diagnostics(mass, min_value, neg_steps, peclet)
    if diag["undershoot"]:
        warnings.warn(f"density undershoot {min_value:.3g} below -{NEG_TOL:g}; readout clips at 0")
    return FpeResult(
        times=dk * np.arange(n_steps + 1),
        mass=mass,
        checkpoints=out,
        grid=grid,
        diagnostics=diag,
        meta={"kind": "accumulation", "constants": constants.to_dict(), "grid": grid.to_dict(),
              "horizon": horizon, "phi_offset": phi_offset, "origin_edges": origin_edges},
    )


def solve_fpe_1d(
    constants: CalibratedConstants,
    ratio: float,
    grid: Grid1D,
    horizon: float,
    checkpoints=None,
    phi_offset: float = 0.0,
    x0: float = 1.0,
    sigma: float = 0.05,
) -> FpeResult:
    """Scaled consumption density on [0, x_max].

    dq/dt = -d_x[(psi x - 1/ratio) q] + 1/2 Phi^2(t) d_x^2[x^2 q]

    x = 0 absorbs (the fund is exhausted) and x_max truncates.  ``mass``
    holds the survival curve at every time step.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    fw = FwApproximation.from_constants(constants)
    dk = grid.dk
    n_steps = int(round(horizon / dk))
    if n_steps < 1 or abs(n_steps * dk - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError("horizon must be a positive multiple of the time step")
    cps = _checkpoint_steps([horizon] if checkpoints is None else checkpoints, dk, n_steps)
    ic = initial_density(grid, x0, sigma)
    x = grid.x
    drain = 0.0 if math.isinf(ratio) else 1.0 / ratio
    a = (constants.psi * x - drain)[None, :]
    x2 = (x**2)[None, :]

    p = ic.values.copy()
    mass = np.empty(n_steps + 1)
    mass[0] = _mass(grid, p)
    out = {}
    if 0 in cps:
        out[cps[0]] = DensityField(grid, p.copy(), 0.0, mass[0])
    min_value = float(p.min())
    neg_steps = 0
    peclet = 0.0
    for k in range(n_steps):
        t = (k + 1) * dk
        d = fw_phi_squared(fw, phi_offset + t) * x2
        if k == 0:
            peclet = _peclet(a, d, grid.dx)
        lo, di, up = _line_operator(a, d, grid.dx, dk, ABSORBING, ABSORBING)
        p[1:-1] = _solve_lines(lo, di, up, p[None, 1:-1], f"t={t:g}")[0]
        _flush(p)
        mass[k + 1] = _mass(grid, p)
        m = float(p.min())
        if m < -NEG_TOL:
            neg_steps += 1
        min_value = min(min_value, m)
        if k + 1 in cps:
            out[cps[k + 1]] = DensityField(grid, p.copy(), t, mass[0])

    diag = _finish_diagnostics(mass, min_value, neg_steps, peclet)
    return FpeResult(
        times=dk * np.arange(n_steps + 1),
        mass=mass,
        checkpoints=out,
        grid=grid,
        diagnostics=diag,
        meta={"kind": "consumption", "ratio": ratio, "constants": constants.to_dict(),
              "grid": grid.to_dict(), "horizon": horizon, "phi_offset": phi_offset,
              "x0": x0, "sigma": sigma},
    )


def survival_curve(result: FpeResult) -> tuple[np.ndarray, np.ndarray]:
    """Interior mass at every step of a consumption solve."""
    if not isinstance(result.grid, Grid1D):
        raise ValueError("survival needs a 1-D solve")
    return result.times.copy(), result.mass.copy()


def survival_at(times: np.ndarray, surv: np.ndarray, t) -> np.ndarray | float:
    """Linear interpolation of a survival curve; beyond the end is an error."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > times[-1] + 1e-9) or np.any(t_arr < times[0] - 1e-9):
        raise ValueError("requested time outside the solved horizon")
    out = np.interp(t_arr, times, surv)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MfptReport:
    value: float
    integral: float
    tail: float
    tail_share: float
    final_survival: float
    horizon_warning: bool

    def to_dict(self) -> dict:
        return asdict(self)


def mfpt_from_survival(times, surv, tail_window: float = 10.0, warn_above: float = 0.05) -> MfptReport:
    """Integral of S(t) by the trapezoid rule plus an exponential tail.

    The tail S(H) e^{-lam (t-H)} uses the decay rate over the last
    ``tail_window`` years of the curve.
    """
    times = np.asarray(times, dtype=float)
    surv = np.asarray(surv, dtype=float)
    if times.size < 2 or times.shape != surv.shape:
        raise ValueError("need matching time and survival arrays")
    if np.any(np.diff(surv) > 1e-9):
        raise ValueError("survival curve must be non-increasing")
    integral = float(np.trapezoid(surv, times) + times[0])
    s_end = float(surv[-1])
    tail = 0.0
    if s_end > 0:
        span = min(tail_window, (times[-1] - times[0]) / 2)
        s_then = float(np.interp(times[-1] - span, times, surv))
        if s_then > s_end > 0 and span > 0:
            tail = s_end * span / math.log(s_then / s_end)
        else:
            tail = math.inf
    warn = s_end > warn_above
    if warn:
        warnings.warn(
            f"survival {s_end:.3f} at the horizon exceeds {warn_above}; horizon too short for the tolerance",
            HorizonWarning,
        )
    value = integral + tail
    return MfptReport(value, integral, tail, tail / value if value > 0 else 0.0, s_end, warn)


def marginals(field: DensityField) -> tuple[np.ndarray, np.ndarray]:
    """(v-marginal on v nodes, s-marginal on s nodes) by the trapezoid rule."""
    if field.dims != 2:
        raise ValueError("marginals need a 2-D field")
    g = field.grid
    p = field.values
    return np.trapezoid(p, dx=g.dm, axis=1), np.trapezoid(p, dx=g.dh, axis=0)


@dataclass(frozen=True)
class Exceedance:
    raw: float
    renormalized: float
    mass: float

    def to_dict(self) -> dict:
        return asdict(self)


def exceedance_from_density(field: DensityField, y_over_alpha: float) -> Exceedance:
    """Mass with v above the threshold, linear inside the threshold's cell."""
    if field.dims != 2:
        raise ValueError("exceedance needs a 2-D field")
    g = field.grid
    vmax = g.extent[0]
    if y_over_alpha < 0:
        raise ValueError("threshold must be non-negative")
    if y_over_alpha > vmax:
        raise ValueError(f"threshold {y_over_alpha} lies beyond the truncated domain v <= {vmax}")
    mv = np.trapezoid(np.maximum(field.values, 0.0), dx=g.dm, axis=1)
    total = float(np.trapezoid(mv, dx=g.dh))
    j = min(int(math.floor(y_over_alpha / g.dh)), g.n_v - 1)
    w = y_over_alpha / g.dh - j
    m_at = (1 - w) * mv[j] + w * mv[j + 1]
    part = (1 - w) * g.dh * (m_at + mv[j + 1]) / 2
    rest = float(np.trapezoid(mv[j + 1 :], dx=g.dh)) if j + 1 < g.n_v else 0.0
    raw = float(part + rest)
    return Exceedance(raw, raw / total if total > 0 else float("nan"), total)


@dataclass(frozen=True)
class TruncationReport:
    value: float
    log10: float

    def to_dict(self) -> dict:
        return asdict(self)


def _log_interval(a: float, b: float, c: float, sig: float) -> float:
    """log of the Gaussian mass on [a, b]."""
    # mass = 1 - P(X < a) - P(X > b)
    lo = log_ndtr((a - c) / sig)
    hi = log_ndtr((c - b) / sig)
    return math.log1p(-math.exp(np.logaddexp(lo, hi)))


def _log_gap(a: float, b: float, b_ext: float, c: float, sig: float) -> float:
    """log of the Gaussian mass on [b, b_ext], computed from the tails."""
    if b_ext <= b:
        return -math.inf
    hi_b = float(log_ndtr((c - b) / sig))
    hi_e = float(log_ndtr((c - b_ext) / sig))
    return hi_b + math.log1p(-math.exp(hi_e - hi_b)) if hi_e < hi_b else -math.inf


def boundary_truncation_error(grid: Grid2D, extended: Grid2D, center=(1.0, 1.0), sigmas=(0.05, 0.05)) -> TruncationReport:
    """Initial Gaussian mass gained by enlarging the domain.

    Computed from continuous Gaussian tails in log space, so values far
    below the double-precision range are still reported via ``log10``.
    """
    (vm, sm), (vme, sme) = grid.extent, extended.extent
    if vme < vm or sme < sm:
        raise ValueError("extended grid must contain the original grid")
    (cv, cs), (sv, ss) = center, sigmas
    lv = _log_interval(0.0, vm, cv, sv)
    ls = _log_interval(0.0, sm, cs, ss)
    gv = _log_gap(0.0, vm, vme, cv, sv)
    gs = _log_gap(0.0, sm, sme, cs, ss)
    lve = np.logaddexp(lv, gv)
    # M_ext - M = Mv_ext * gap_s + gap_v * Ms
    log_diff = float(np.logaddexp(lve + gs, gv + ls))
    value = math.exp(log_diff) if log_diff > -745 else 0.0
    return TruncationReport(value, log_diff / math.log(10) if math.isfinite(log_diff) else -math.inf)


def write_checkpoints_csv(result: FpeResult, path: str | Path) -> None:
    """``t,v,s,p`` (2-D) or ``t,x,q`` (1-D) rows for every checkpoint."""
    g = result.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(g, Grid1D):
            w.writerow(["t", "x", "q"])
            for t in sorted(result.checkpoints):
                for x, q in zip(g.x, result.checkpoints[t].clipped()):
                    w.writerow([repr(t), repr(float(x)), repr(float(q))])
        else:
            w.writerow(["t", "v", "s", "p"])
            for t in sorted(result.checkpoints):
                p = result.checkpoints[t].clipped()
                for j, v in enumerate(g.v):
                    for l, s in enumerate(g.s):
                        w.writerow([repr(t), repr(float(v)), repr(float(s)), repr(float(p[j, l]))])


def summary_dict(result: FpeResult) -> dict:
    return {
        "meta": result.meta,
        "diagnostics": result.diagnostics,
        "mass_curve": {"t": result.times.tolist(), "mass": result.mass.tolist()},
        "checkpoints": sorted(result.checkpoints),
    }


def summary_json(result: FpeResult) -> str:
    return json.dumps(summary_dict(result), indent=2, sort_keys=True)
