"""Drift and volatility estimation from longitudinal growth panels.

Pipeline: read or synthesize a panel, optionally deflate by CPI and drop
outliers, bin increments by current growth level per period, fit
a(x) = q x + q2 and b^2(x) = r x^2 + r2 x + r3 in every period slice, smooth
the slice coefficients with a trailing moving average and keep the terminal
smoothed values as constants.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import CalibratedConstants, rescale_monthly_to_annual


class IngestionError(ValueError):
    """Input data is missing, malformed or inconsistent."""


class SchemaError(IngestionError):
    def __init__(self, path, row: int, message: str):
        super().__init__(f"{path}: row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Trajectory:
    id: str
    t0: int
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError(f"trajectory {self.id}: empty value sequence")
        if not np.all(v > 0):
            raise ValueError(f"trajectory {self.id}: values must be positive")
        if abs(v[0] - 1.0) > 1e-12:
            raise ValueError(f"trajectory {self.id}: values[0] must be 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, id: str, t0: int, raw: Sequence[float]) -> "Trajectory":
        raw = np.asarray(raw, dtype=float)
        if raw.size == 0 or raw[0] <= 0:
            raise ValueError(f"trajectory {id}: first value must be positive")
        return cls(id, int(t0), raw / raw[0])

    @property
    def periods(self) -> np.ndarray:
        return self.t0 + np.arange(self.values.size)


@dataclass(frozen=True)
class Panel:
    trajectories: tuple[Trajectory, ...]
    period: str = "month"

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if self.period not in ("month", "year"):
            raise ValueError("period must be 'month' or 'year'")

    def __len__(self) -> int:
        return len(self.trajectories)

    def span(self) -> tuple[int, int]:
        lo = min(tr.t0 for tr in self.trajectories)
        hi = max(tr.t0 + tr.values.size - 1 for tr in self.trajectories)
        return lo, hi


@dataclass(frozen=True)
class CpiSeries:
    t0: int
    levels: np.ndarray

    def __post_init__(self) -> None:
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size == 0:
            raise IngestionError("CPI series is empty")
        if not np.all(lv > 0):
            raise IngestionError("CPI levels must be positive")
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, float]]) -> "CpiSeries":
        entries = sorted((int(t), float(v)) for t, v in entries)
        if not entries:
            raise IngestionError("CPI series is empty")
        ts = [t for t, _ in entries]
        for a, b in zip(ts, ts[1:]):
            if b != a + 1:
                raise IngestionError(f"CPI periods are not contiguous: period {a + 1} is missing")
        return cls(ts[0], np.array([v for _, v in entries]))

    def level(self, period: int) -> float:
        i = period - self.t0
        if i < 0 or i >= self.levels.size:
            raise IngestionError(f"CPI has no entry for period {period}")
        return float(self.levels[i])

    def inverse(self) -> "CpiSeries":
        return CpiSeries(self.t0, 1.0 / self.levels)


def cpi_adjust(panel: Panel, cpi: CpiSeries, base_period: int) -> Panel:
    """Deflate to the base period's prices, then renormalize to start at 1."""
    base = cpi.level(base_period)
    out = []
    for tr in panel.trajectories:
        lo, hi = int(tr.periods[0]), int(tr.periods[-1])
        cpi_hi = cpi.t0 + cpi.levels.size - 1
        if lo < cpi.t0 or hi > cpi_hi:
            first = lo if lo < cpi.t0 else cpi_hi + 1
            raise IngestionError(f"CPI has no entry for period {first} (trajectory {tr.id})")
        lv = cpi.levels[lo - cpi.t0 : hi - cpi.t0 + 1]
        out.append(Trajectory.normalized(tr.id, tr.t0, tr.values * base / lv))
    return Panel(tuple(out), panel.period)


@dataclass(frozen=True)
class SliceFits:
    """Per-period coefficients; NaN where a slice could not be fitted."""

    taus: np.ndarray
    q: np.ndarray
    q2: np.ndarray
    r: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    drift_fitted: np.ndarray
    vol_fitted: np.ndarray
    weighting: str


@dataclass(frozen=True)
class CoefficientSurface:
    """Binned empirical drift ``a`` and raw second moment ``b2``.

    One entry per populated (tau, bin); ``mean_x``/``mean_x2`` are the
    within-bin means of the growth level, used as regressors.
    """

    tau: np.ndarray
    bin_index: np.ndarray
    bin_width: float
    a: np.ndarray
    b2: np.ndarray
    count: np.ndarray
    mean_x: np.ndarray
    mean_x2: np.ndarray
    period: str = "month"
    slice_fits: SliceFits | None = None

    @property
    def bin_center(self) -> np.ndarray:
        return (self.bin_index + 0.5) * self.bin_width

    def slice(self, tau: int) -> np.ndarray:
        return np.nonzero(self.tau == tau)[0]

    def is_zero(self) -> bool:
        return not (np.any(self.a) or np.any(self.b2))

    def to_rows(self) -> list[dict]:
        return [
            {"tau": int(t), "x_center": float(c), "a": float(a), "b2": float(b), "count": int(n)}
            for t, c, a, b, n in zip(self.tau, self.bin_center, self.a, self.b2, self.count)
        ]


def build_surfaces(panel: Panel, bin_width: float) -> CoefficientSurface:
    if len(panel) == 0:
        raise ValueError("panel is empty")
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    xs, incs, taus = [], [], []
    for tr in panel.trajectories:
        v = tr.values
        if v.size < 2:
            continue
        xs.append(v[:-1])
        incs.append(np.diff(v))
        taus.append(tr.t0 + np.arange(v.size - 1))
    if not xs:
        raise ValueError("panel has no increments")
    x = np.concatenate(xs)
    inc = np.concatenate(incs)
    tau = np.concatenate(taus)
    b = np.floor(x / bin_width).astype(np.int64)
    keys = np.stack([tau, b], axis=1)
    uniq, inv, cnt = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    mean = lambda w: np.bincount(inv, weights=w) / cnt
    return CoefficientSurface(
        tau=uniq[:, 0],
        bin_index=uniq[:, 1],
        bin_width=float(bin_width),
        a=mean(inc),
        b2=mean(inc * inc),
        count=cnt,
        mean_x=mean(x),
        mean_x2=mean(x * x),
        period=panel.period,
    )


def _wls(design: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray | None:
    sw = np.sqrt(w)
    A = design * sw[:, None]
    coef, _, rank, _ = np.linalg.lstsq(A, y * sw, rcond=None)
    return coef if rank == design.shape[1] else None


def fit_slices(surface: CoefficientSurface, weighting: str = "precision") -> CoefficientSurface:
    """Weighted least squares per period slice.

    ``weighting="count"`` weights each bin by its sample size.
    ``"precision"`` (default) divides further by the bin's expected
    increment variance, proportional to mean x^2 for the drift fit and
    (mean x^2)^2 for the second-moment fit, which keeps a few high-growth
    bins from dominating.  Both reproduce exact data exactly.
    """
    if weighting not in ("count", "precision"):
        raise ValueError("weighting must be 'count' or 'precision'")
    order = np.argsort(surface.tau, kind="stable")
    taus, starts = np.unique(surface.tau[order], return_index=True)
    ends = np.append(starts[1:], order.size)
    m = taus.size
    out = {k: np.full(m, np.nan) for k in ("q", "q2", "r", "r2", "r3")}
    dfit = np.zeros(m, dtype=bool)
    vfit = np.zeros(m, dtype=bool)
    for i, (s, e) in enumerate(zip(starts, ends)):
        idx = order[s:e]
        c = surface.count[idx].astype(float)
        mx, mx2 = surface.mean_x[idx], surface.mean_x2[idx]
        one = np.ones_like(mx)
        if idx.size >= 2:
            w = c / mx2 if weighting == "precision" else c
            coef = _wls(np.stack([mx, one], axis=1), surface.a[idx], w)
            if coef is not None:
                out["q"][i], out["q2"][i] = coef
                dfit[i] = True
        if idx.size >= 3:
            w = c / mx2**2 if weighting == "precision" else c
            coef = _wls(np.stack([mx2, mx, one], axis=1), surface.b2[idx], w)
            if coef is not None:
                out["r"][i], out["r2"][i], out["r3"][i] = coef
                vfit[i] = True
    fits = SliceFits(taus, drift_fitted=dfit, vol_fitted=vfit, weighting=weighting, **out)
    return replace(surface, slice_fits=fits)


def moving_average(series: Sequence[float], window_fraction: float) -> np.ndarray:
    """Trailing average over the N = ceil(fraction * len) latest points."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ValueError("series is empty")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    n = math.ceil(window_fraction * s.size)
    cs = np.concatenate([[0.0], np.cumsum(s)])
    hi = np.arange(1, s.size + 1)
    lo = np.maximum(hi - n, 0)
    return (cs[hi] - cs[lo]) / (hi - lo)


def _drop_count(frac: float, n: int) -> int:
    return int(math.floor(frac * n + 0.5))


def trajectory_volatility(tr: Trajectory) -> float:
    """Population std of per-period simple returns (0 for fewer than two)."""
    if tr.values.size < 3:
        return 0.0
    return float(np.std(tr.values[1:] / tr.values[:-1] - 1.0))


def filter_outliers(panel: Panel, vol_drop_fraction: float, growth_drop_fraction: float) -> Panel:
    """Drop the most volatile and the fastest-growing trajectories.

    Both sets are ranked on the full panel (counts rounded half up), and
    their union is removed; ties go to the earlier trajectory.
    """
    for f in (vol_drop_fraction, growth_drop_fraction):
        if not 0 <= f < 0.5:
            raise ValueError("drop fractions must lie in [0, 0.5)")
    n = len(panel)
    if n == 0:
        raise ValueError("panel is empty")
    vols = np.array([trajectory_volatility(tr) for tr in panel.trajectories])
    growth = np.array([tr.values[-1] for tr in panel.trajectories])
    drop = set()
    for score, frac in ((vols, vol_drop_fraction), (growth, growth_drop_fraction)):
        k = _drop_count(frac, n)
        if k:
            # lexsort: last key primary; ties resolved by position
            ranked = np.lexsort((np.arange(n), -score))
            drop.update(int(i) for i in ranked[:k])
    keep = tuple(tr for i, tr in enumerate(panel.trajectories) if i not in drop)
    if not keep:
        raise ValueError("outlier filtering would empty the panel")
    return Panel(keep, panel.period)


def _terminal(values: np.ndarray, fitted: np.ndarray, window_fraction: float) -> float | None:
    v = values[fitted]
    if v.size == 0:
        return None
    return float(moving_average(v, window_fraction)[-1])


def smoothed_terminal(surface: CoefficientSurface, window_fraction: float) -> dict:
    """Terminal moving-average values of q and r over fitted slices."""
    f = surface.slice_fits
    if f is None:
        raise ValueError("surface has no slice fits")
    return {
        "q": _terminal(f.q, f.drift_fitted, window_fraction),
        "r": _terminal(f.r, f.vol_fitted, window_fraction),
        "drift_slices": int(f.drift_fitted.sum()),
        "vol_slices": int(f.vol_fitted.sum()),
    }


def _side(surface: CoefficientSurface, window_fraction: float, label: str) -> tuple[float, float]:
    sm = smoothed_terminal(surface, window_fraction)
    q, r = sm["q"], sm["r"]
    if q is None or r is None:
        if surface.is_zero():
            # no spread in x to fit, but nothing moves either
            return (0.0 if q is None else q), (0.0 if r is None else r)
        raise ValueError(f"{label} surface has no fitted slices")
    if r < 0:
        raise ValueError(f"{label} fitted second-moment slope is negative; volatility is not real")
    return q, r


def extract_constants(
    stock_surface: CoefficientSurface,
    salary_surface: CoefficientSurface,
    window_fraction: float = 0.5,
    lambda_contrib: float = 0.1,
    n_constituents: int = 500,
) -> CalibratedConstants:
    """Turn fitted, smoothed surfaces into model constants.

    Monthly stock coefficients are annualized; yearly salary coefficients
    are used as they are.
    """
    q, r = _side(stock_surface, window_fraction, "stock")
    xi, r_sal = _side(salary_surface, window_fraction, "salary")
    rv = math.sqrt(r)
    if stock_surface.period == "month":
        psi, phi = rescale_monthly_to_annual(q, rv)
        qm, rm = q, rv
    else:
        psi, phi, qm, rm = q, rv, None, None
    if salary_surface.period == "month":
        xi, eta = rescale_monthly_to_annual(xi, math.sqrt(r_sal))
    else:
        eta = math.sqrt(r_sal)
    return CalibratedConstants(psi=psi, phi=phi, xi=xi, eta=eta, lambda_contrib=lambda_contrib,
                               n_constituents=n_constituents, q_monthly=qm, r_monthly_vol=rm)


def estimate_side(panel: Panel, bin_width: float, weighting: str = "precision") -> CoefficientSurface:
    return fit_slices(build_surfaces(panel, bin_width), weighting)


# --- synthetic panels -------------------------------------------------------


def synth_gbm_panel(
    n_paths: int,
    horizon: int,
    drift: float,
    vol: float,
    seed: int,
    period: str = "month",
    id_prefix: str = "p",
) -> Panel:
    """Exact lognormal steps with per-period drift and volatility.

    Each trajectory has ``horizon + 1`` values starting at 1, so the
    expected per-period increment is x (e^drift - 1).
    """
    if n_paths < 1 or horizon < 1:
        raise ValueError("need n_paths >= 1 and horizon >= 1")
    if vol < 0:
        raise ValueError("vol must be non-negative")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n_paths, horizon))
    logs = np.cumsum((drift - 0.5 * vol * vol) + vol * z, axis=1)
    vals = np.concatenate([np.ones((n_paths, 1)), np.exp(logs)], axis=1)
    width = len(str(n_paths - 1))
    return Panel(tuple(Trajectory(f"{id_prefix}{i:0{width}d}", 0, vals[i]) for i in range(n_paths)), period)


# --- CSV ingestion ----------------------------------------------------------


def _rows(path, header: Sequence[str]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise SchemaError(path, 1, "file is empty") from None
        if [h.strip() for h in head] != list(header):
            raise SchemaError(path, 1, f"expected header {','.join(header)}, got {','.join(head)}")
        for n, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(path, n, f"expected {len(header)} fields, got {len(row)}")
            yield n, [c.strip() for c in row]


def _int(path, n, s, what):
    try:
        return int(s)
    except ValueError:
        raise SchemaError(path, n, f"{what} {s!r} is not an integer") from None


def _pos(path, n, s, what):
    try:
        v = float(s)
    except ValueError:
        raise SchemaError(path, n, f"{what} {s!r} is not a number") from None
    if not (v > 0 and math.isfinite(v)):
        raise SchemaError(path, n, f"{what} must be positive, got {s}")
    return v


def read_panel_csv(path: str | Path, period: str = "month") -> Panel:
    """Read ``id,t,value`` rows into a normalized panel.

    A gap in an id's periods starts a new trajectory (a re-inclusion), which
    is renormalized from its own first value.
    """
    obs = defaultdict(dict)
    order = []
    for n, (pid, t, v) in _rows(path, ("id", "t", "value")):
        if not pid:
            raise SchemaError(path, n, "empty id")
        ti = _int(path, n, t, "period")
        if pid not in obs:
            order.append(pid)
        if ti in obs[pid]:
            raise SchemaError(path, n, f"duplicate observation for id {pid} at period {ti}")
        obs[pid][ti] = _pos(path, n, v, "value")
    trajs = []
    for pid in order:
        ts = sorted(obs[pid])
        seg = [ts[0]]
        for a, b in zip(ts, ts[1:] + [None]):
            if b is not None and b == a + 1:
                seg.append(b)
                continue
            trajs.append(Trajectory.normalized(pid, seg[0], [obs[pid][k] for k in seg]))
            if b is not None:
                seg = [b]
    if not trajs:
        raise IngestionError(f"{path}: panel has no observations")
    return Panel(tuple(trajs), period)


def read_cpi_csv(path: str | Path) -> CpiSeries:
    entries = {}
    for n, (t, v) in _rows(path, ("t", "index")):
        ti = _int(path, n, t, "period")
        if ti in entries:
            raise SchemaError(path, n, f"duplicate CPI period {ti}")
        entries[ti] = _pos(path, n, v, "index")
    return CpiSeries.from_entries(entries.items())


def write_panel_csv(panel: Panel, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "t", "value"])
        for tr in panel.trajectories:
            for t, v in zip(tr.periods, tr.values):
                w.writerow([tr.id, int(t), repr(float(v))])


def write_cpi_csv(cpi: CpiSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "index"])
        for i, v in enumerate(cpi.levels):
            w.writerow([cpi.t0 + i, repr(float(v))])
