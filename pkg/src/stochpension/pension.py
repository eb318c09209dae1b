"""Pension questions on top of the solvers: implied returns, probability
tables, survival and exhaustion times, and mortality-weighted outcomes."""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .fpe import (
    FpeResult,
    Grid1D,
    Grid2D,
    exceedance_from_density,
    initial_density,
    mfpt_from_survival,
    solve_fpe_1d,
    solve_fpe_2d,
    survival_at,
    survival_curve,
)
from .model import CalibratedConstants

BRACKET = (-0.99, 1.0)
RATE_TOL = 1e-10


@dataclass(frozen=True)
class PensionQuestion:
    saving_years: float
    ratio: float
    lambda_contrib: float = 0.1
    retirement_age: int = 67
    consumption_ratio: float = 10.0

    def __post_init__(self) -> None:
        if min(self.saving_years, self.ratio, self.retirement_age, self.consumption_ratio) <= 0:
            raise ValueError("all question parameters must be positive")
        if not 0 < self.lambda_contrib < 1:
            raise ValueError("contribution fraction must lie in (0, 1)")


# --- rates ------------------------------------------------------------------


def _annuity_factor(r: float, n: int) -> float:
    """sum_{i=1}^{n} (1+r)^i."""
    # expm1/log1p keep full precision for rates near zero
    return n if r == 0 else (1.0 + r) * math.expm1(n * math.log1p(r)) / r


def _solve_rate(f, what: str) -> float:
    lo, hi = BRACKET
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError(f"{what}: no rate in [{lo}, {hi}] reconciles the cash flows")
    return bisect(f, lo, hi, xtol=RATE_TOL, maxiter=200)


def implied_annual_return(ratio: float, years: int, lambda_contrib: float = 0.1) -> float:
    """Rate r with  lambda * sum_{i=1}^{years} (1+r)^i = ratio."""
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    if years < 1:
        raise ValueError("years must be >= 1")
    if lambda_contrib <= 0:
        raise ValueError("contribution fraction must be positive")
    return _solve_rate(lambda r: lambda_contrib * _annuity_factor(r, int(years)) - ratio, "implied return")


def retirement_irr(consumption_ratio: float, years: int) -> float:
    """Rate r with  sum_{i=1}^{years} (1+r)^-i = consumption_ratio."""
    if consumption_ratio <= 0:
        raise ValueError("consumption ratio must be positive")
    if years < 1:
        raise ValueError("years must be >= 1")
    n = int(years)

    def f(r):
        if r == 0:
            return n - consumption_ratio
        return -math.expm1(-n * math.log1p(r)) / r - consumption_ratio

    return _solve_rate(f, "IRR")


# --- accumulation -----------------------------------------------------------


def solve_accumulation(
    constants: CalibratedConstants,
    grid: Grid2D,
    horizons: Sequence[float],
    sigma: float = 0.05,
) -> FpeResult:
    """One forward solve with a checkpoint at every requested horizon."""
    ic = initial_density(grid, (1.0, 1.0), (sigma, sigma))
    return solve_fpe_2d(constants, grid, ic, max(horizons), checkpoints=sorted(set(horizons)))


def pension_size_table(
    saving_years: int,
    ratios: Sequence[float],
    constants: CalibratedConstants,
    grid: Grid2D | None = None,
    solution: FpeResult | None = None,
    sigma: float = 0.05,
) -> list[dict]:
    """Rows (ratio, implied return, probability of reaching the ratio)."""
    if not ratios:
        return []
    grid = grid or Grid2D()
    if solution is None:
        solution = solve_accumulation(constants, grid, [saving_years], sigma)
    field = solution.field_at(saving_years)
    rows = []
    for y in ratios:
        ex = exceedance_from_density(field, y)
        rows.append({
            "ratio": y,
            "years": saving_years,
            "implied_return": implied_annual_return(y, saving_years, constants.lambda_contrib),
            "probability": ex.raw,
            "probability_renormalized": ex.renormalized,
        })
    return rows


# --- consumption ------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _consumption_curve(constants: CalibratedConstants, ratio: float, grid: Grid1D, horizon: float,
                       phi_offset: float, sigma: float):
    res = solve_fpe_1d(constants, ratio, grid, horizon, phi_offset=phi_offset, sigma=sigma)
    t, s = survival_curve(res)
    t.setflags(write=False)
    s.setflags(write=False)
    return t, s, tuple(sorted(res.diagnostics.items()))


def consumption_survival(
    constants: CalibratedConstants,
    ratio: float,
    grid: Grid1D | None = None,
    horizon: float = 60.0,
    phi_offset: float = 0.0,
    sigma: float = 0.05,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Survival curve of the drawn-down fund (cached per argument set)."""
    t, s, diag = _consumption_curve(constants, float(ratio), grid or Grid1D(), float(horizon),
                                    float(phi_offset), float(sigma))
    return t, s, dict(diag)


def consumption_survival_table(
    consumption_ratio: float,
    retirement_years: Sequence[int],
    constants: CalibratedConstants,
    grid: Grid1D | None = None,
    horizon: float = 60.0,
) -> list[dict]:
    """Rows (years, IRR, survival) for one initial-pension / consumption ratio."""
    if not retirement_years:
        return []
    t, s, _ = consumption_survival(constants, consumption_ratio, grid, horizon)
    return [
        {
            "ratio": consumption_ratio,
            "years": y,
            "irr": retirement_irr(consumption_ratio, y),
            "survival": survival_at(t, s, y),
        }
        for y in retirement_years
    ]


def mfpt_table(
    ratios: Sequence[float],
    constants: CalibratedConstants,
    grid: Grid1D | None = None,
    horizon: float = 60.0,
) -> list[dict]:
    rows = []
    for ratio in ratios:
        t, s, _ = consumption_survival(constants, ratio, grid, horizon)
        rep = mfpt_from_survival(t, s)
        rows.append({"ratio": ratio, "mfpt": rep.value, "tail_share": rep.tail_share,
                     "horizon_warning": rep.horizon_warning})
    return rows


# --- mortality --------------------------------------------------------------


@dataclass(frozen=True)
class LifeTable:
    """Per-age rows; the last row is the open interval ``terminal_age``+."""

    ages: np.ndarray
    q: np.ndarray
    l: np.ndarray
    d: np.ndarray
    L: np.ndarray
    T: np.ndarray
    e: np.ndarray
    terminal_age: int

    def __post_init__(self) -> None:
        if np.any(np.diff(self.l) > 0):
            raise ValueError("survivor counts must be non-increasing")
        if abs(self.q[-1] - 1.0) > 1e-9:
            raise ValueError("terminal open interval must have q = 1")
        if np.any(np.abs(self.d[:-1] - (self.l[:-1] - self.l[1:])) > 1.0):
            raise ValueError("deaths disagree with survivor differences")
        if np.any(np.abs(self.q - self.d / self.l) > 1e-3):
            raise ValueError("death probabilities disagree with deaths / survivors")

    @classmethod
    def from_csv(cls, source) -> "LifeTable":
        """Read ``age,q,l,d,L,T,e``; the last age may be written ``N+``."""
        if isinstance(source, (str, Path)):
            text = Path(source).read_text()
        else:
            text = source.read()
        reader = csv.reader(io.StringIO(text))
        head = next(reader)
        if [h.strip() for h in head] != ["age", "q", "l", "d", "L", "T", "e"]:
            raise ValueError("life table header must be age,q,l,d,L,T,e")
        ages, cols, terminal = [], [], None
        for n, row in enumerate(reader, start=2):
            if not row:
                continue
            a = row[0].strip()
            if a.endswith("+"):
                terminal = int(a[:-1])
                a = a[:-1]
            elif terminal is not None:
                raise ValueError(f"row {n}: rows after the open interval")
            ages.append(int(a))
            cols.append([float(c) for c in row[1:]])
        if terminal is None:
            raise ValueError("life table needs a terminal open interval (e.g. 100+)")
        arr = np.array(cols)
        ages = np.array(ages)
        if np.any(np.diff(ages) != 1):
            raise ValueError("ages must be consecutive")
        return cls(ages, *(arr[:, i] for i in range(6)), terminal)

    @classmethod
    def us_2003(cls) -> "LifeTable":
        """US period life table, 2003, shipped with the package."""
        ref = resources.files("stochpension").joinpath("data/us_life_table_2003.csv")
        with ref.open("r") as fh:
            return cls.from_csv(fh)

    def row(self, age: int) -> int:
        i = int(age) - int(self.ages[0])
        if i < 0 or i >= self.ages.size:
            raise ValueError(f"age {age} is outside the table")
        return i


@dataclass(frozen=True)
class DeathDistribution:
    """Remaining-lifetime distribution from a given age.

    ``pdf[t]`` is the probability of dying in year t after the current age;
    ``times`` are the representative death times (mid-year, and the open
    interval's expectancy for the last entry).
    """

    age: int
    pdf: np.ndarray
    times: np.ndarray

    def expectancy(self) -> float:
        return float(np.dot(self.pdf, self.times))


def conditional_death_pdf(table: LifeTable, current_age: int) -> DeathDistribution:
    i = table.row(current_age)
    # survivor differences telescope to exactly one; the rounded d column need not
    pdf = -np.diff(np.append(table.l[i:], 0.0)) / table.l[i]
    n = pdf.size
    times = np.arange(n) + 0.5
    times[-1] = (n - 1) + table.e[-1]
    return DeathDistribution(int(current_age), pdf, times)


def prob_pension_outlives(
    consumption_ratio: float,
    retirement_age: int,
    life_table: LifeTable,
    constants: CalibratedConstants,
    grid: Grid1D | None = None,
    horizon: float = 60.0,
) -> float:
    """Probability that the fund is not exhausted when the pensioner dies."""
    dist = conditional_death_pdf(life_table, retirement_age)
    t, s, _ = consumption_survival(constants, consumption_ratio, grid, horizon)
    if dist.times[-1] > t[-1]:
        raise ValueError("solve horizon is shorter than the remaining life table")
    return float(np.dot(dist.pdf, survival_at(t, s, dist.times)))


def mortality_table(
    age: int,
    ratios: Sequence[float],
    constants: CalibratedConstants,
    life_table: LifeTable | None = None,
    grid: Grid1D | None = None,
    horizon: float = 60.0,
) -> list[dict]:
    table = life_table or LifeTable.us_2003()
    return [
        {"age": age, "ratio": r,
         "probability": prob_pension_outlives(r, age, table, constants, grid, horizon)}
        for r in ratios
    ]


# --- shifted correlation ----------------------------------------------------


@dataclass(frozen=True)
class ShiftedCorrelation:
    rho: float
    overlap: int


def shifted_pearson(series_a: Sequence[float], series_b: Sequence[float], shift: int) -> ShiftedCorrelation:
    """Pearson correlation of a(t) against b(t + shift) on the overlap."""
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    shift = int(shift)
    if shift >= 0:
        a2, b2 = a[: max(b.size - shift, 0)], b[shift:]
    else:
        a2, b2 = a[-shift:], b[: max(a.size + shift, 0)]
    n = min(a2.size, b2.size)
    if n < 3:
        raise ValueError(f"overlap of {n} points is too short (need >= 3)")
    a2, b2 = a2[:n], b2[:n]
    if np.std(a2) == 0 or np.std(b2) == 0:
        raise ValueError("a constant series has no correlation")
    return ShiftedCorrelation(float(np.corrcoef(a2, b2)[0, 1]), n)
