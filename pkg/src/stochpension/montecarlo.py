"""Euler-Maruyama engine and Monte Carlo estimators.

This module is the independent oracle for every probability the
Fokker-Planck solvers produce.  Paths are generated in fixed-size blocks;
block ``b`` draws from a generator seeded by ``(seed, b)``, so results are
bit-identical whatever the number of worker threads.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .index import FwApproximation, fw_phi_squared
from .model import CalibratedConstants, LinearSdeCoefficients

FLOOR = 1e-12


@dataclass(frozen=True)
class EulerConfig:
    """Time stepping, ensemble size and seeding for one simulation.

    ``record_times`` selects the stored columns (``None`` stores every step).
    ``block_size`` fixes the RNG partition; changing it changes the draws,
    changing ``workers`` does not.
    """

    dt: float
    horizon: float
    n_paths: int
    seed: int = 0
    antithetic: bool = False
    record_times: tuple[float, ...] | None = None
    workers: int = 1
    block_size: int = 8192

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must be at least one step")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.block_size < 2 or (self.antithetic and self.block_size % 2):
            raise ValueError("block_size must be >= 2 (and even with antithetic draws)")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def record_steps(self) -> np.ndarray:
        if self.record_times is None:
            return np.arange(self.n_steps + 1)
        steps = np.rint(np.asarray(self.record_times, dtype=float) / self.dt).astype(int)
        if np.any(np.abs(steps * self.dt - np.asarray(self.record_times)) > 1e-9 * max(1.0, self.horizon)):
            raise ValueError("record_times must lie on the time grid")
        if np.any(steps < 0) or np.any(steps > self.n_steps):
            raise ValueError("record_times must lie within [0, horizon]")
        return steps

    def to_dict(self) -> dict:
        d = asdict(self)
        d["record_times"] = None if self.record_times is None else list(self.record_times)
        # the worker count never changes results, so reports stay identical across it
        d.pop("workers")
        return d


@dataclass
class PathEnsemble:
    """Simulated values at the recorded times, one row per path.

    ``first_passage`` holds exit times (NaN while inside the domain) for
    ensembles with an absorbing or killing boundary.  ``alive`` marks paths
    still inside the domain at the horizon.
    """

    times: np.ndarray
    paths: np.ndarray
    meta: dict
    first_passage: np.ndarray | None = None
    alive: np.ndarray | None = None
    companion: np.ndarray | None = None
    floor_hits: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def column(self, t: float | None) -> int:
        if t is None:
            return self.times.size - 1
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} was not recorded")
        return i


@dataclass(frozen=True)
class Estimate:
    value: float | np.ndarray
    se: float | np.ndarray
    n: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        conv = lambda v: v.tolist() if isinstance(v, np.ndarray) else v
        return {"value": conv(self.value), "se": conv(self.se), "n": self.n, "details": self.details}


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _normals(rng: np.random.Generator, shape: tuple, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal(shape)
    half = rng.standard_normal((shape[0] // 2,) + shape[1:])
    return np.concatenate([half, -half])


def _run_blocks(config: EulerConfig, kernel: Callable[[np.random.Generator, int], dict]) -> dict:
    """Run ``kernel`` over fixed path blocks and stitch results in block order."""
    sizes = []
    left = config.n_paths
    while left > 0:
        sizes.append(min(config.block_size, left))
        left -= sizes[-1]
    if config.antithetic and sizes[-1] % 2:
        raise ValueError("antithetic sampling needs an even number of paths")

    def job(b: int) -> dict:
        return kernel(_block_rng(config.seed, b), sizes[b])

    if config.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    out = {}
    for key in parts[0]:
        vals = [p[key] for p in parts]
        out[key] = sum(vals) if np.isscalar(vals[0]) else np.concatenate(vals)
    return out


def euler_paths(
    coeffs: LinearSdeCoefficients,
    x0: float,
    config: EulerConfig,
    positivity_guard: bool | None = None,
) -> PathEnsemble:
    """Euler scheme for dx = (a1 x + a2) dt + (b1 x + b2) dw.

    With ``positivity_guard`` (default: on for purely multiplicative noise
    with non-negative offset drift and x0 > 0) a step landing at or below 0
    is floored at 1e-12 and counted.
    """
    n = config.n_steps
    dt = config.dt
    t = coeffs.t0 + dt * np.arange(n)
    a1, a2, b1, b2 = (np.broadcast_to(v, t.shape) for v in coeffs.at(t))
    if positivity_guard is None:
        positivity_guard = x0 > 0 and not np.any(b2) and not np.any(a2 < 0)
    rec = config.record_steps()
    sq = math.sqrt(dt)

    def kernel(rng, m):
        x = np.full(m, float(x0))
        out = np.empty((m, rec.size))
        hits = 0
        j = 0
        if rec[0] == 0:
            out[:, 0] = x
            j = 1
        for k in range(n):
            z = _normals(rng, (m,), config.antithetic)
            x = x + (a1[k] * x + a2[k]) * dt + (b1[k] * x + b2[k]) * sq * z
            if positivity_guard:
                bad = x <= 0
                if bad.any():
                    hits += int(bad.sum())
                    x[bad] = FLOOR
            while j < rec.size and rec[j] == k + 1:
                out[:, j] = x
                j += 1
        return {"paths": out, "hits": hits}

    res = _run_blocks(config, kernel)
    return PathEnsemble(
        times=coeffs.t0 + rec * dt,
        paths=res["paths"],
        meta={"kind": "linear_sde", "x0": x0, "config": config.to_dict()},
        floor_hits=int(res["hits"]),
    )


def simulate_index_average(
    n_constituents: int,
    constants: CalibratedConstants,
    config: EulerConfig,
    x0: float = 1.0,
    scheme: str = "euler",
) -> PathEnsemble:
    """Equal-weight average of independent constituent GBM paths.

    ``scheme="exact"`` samples each constituent's lognormal law directly at
    the record times, so the average carries no time-discretisation bias.
    """
    if n_constituents < 1:
        raise ValueError("n_constituents must be >= 1")
    if scheme not in ("euler", "exact"):
        raise ValueError(f"unknown scheme {scheme!r}")
    n = config.n_steps
    dt = config.dt
    sq = math.sqrt(dt)
    psi, phi = constants.psi, constants.phi
    rec = config.record_steps()

    def exact_kernel(rng, m):
        logx = np.zeros((m, n_constituents))
        out = np.empty((m, rec.size))
        prev = 0
        for j, k in enumerate(rec):
            h = (k - prev) * dt
            if h > 0:
                z = _normals(rng, (m, n_constituents), config.antithetic)
                logx += (psi - 0.5 * phi * phi) * h + phi * math.sqrt(h) * z
            out[:, j] = x0 * np.exp(logx).mean(axis=1)
            prev = k
        return {"paths": out, "hits": 0}

    def kernel(rng, m):
        x = np.full((m, n_constituents), float(x0))
        out = np.empty((m, rec.size))
        hits = 0
        j = 0
        if rec[0] == 0:
            out[:, 0] = x0
            j = 1
        for k in range(n):
            z = _normals(rng, (m, n_constituents), config.antithetic)
            x += x * (psi * dt + phi * sq * z)
            bad = x <= 0
            if bad.any():
                hits += int(bad.sum())
                x[bad] = FLOOR
            while j < rec.size and rec[j] == k + 1:
                out[:, j] = x.mean(axis=1)
                j += 1
        return {"paths": out, "hits": hits}

    res = _run_blocks(config, exact_kernel if scheme == "exact" else kernel)
    return PathEnsemble(
        times=rec * dt,
        paths=res["paths"],
        meta={"kind": "index_average", "n_constituents": n_constituents, "scheme": scheme,
              "constants": constants.to_dict(), "config": config.to_dict()},
        floor_hits=int(res["hits"]),
    )


def simulate_fund(
    constants: CalibratedConstants,
    config: EulerConfig,
    v0: float = 1.0,
    s0: float = 1.0,
    initial_spread: tuple[float, float] = (0.0, 0.0),
    domain: tuple[float, float] | None = None,
) -> PathEnsemble:
    """Joint (fund growth v, salary growth s) paths.

    dv = (psi v + Lambda s) dt + Phi(t) v dW,  ds = xi s dt + eta s dw
    with independent drivers.  ``initial_spread`` draws the start point from
    a Gaussian of the given standard deviations (matching a smoothed initial
    density); ``domain = (v_max, s_max)`` kills paths that leave the
    truncated rectangle, which is the event the solver's zero far-boundary
    removes.  ``paths`` holds v and ``companion`` holds s.
    """
    fw = FwApproximation.from_constants(constants)
    n = config.n_steps
    dt = config.dt
    sq = math.sqrt(dt)
    vol = np.sqrt(fw_phi_squared(fw, dt * np.arange(n)))
    psi, lam, xi, eta = constants.psi, constants.lambda_contrib, constants.xi, constants.eta
    rec = config.record_steps()

    def kernel(rng, m):
        v = np.full(m, float(v0))
        s = np.full(m, float(s0))
        if initial_spread[0] > 0 or initial_spread[1] > 0:
            v = v + initial_spread[0] * rng.standard_normal(m)
            s = s + initial_spread[1] * rng.standard_normal(m)
        alive = np.ones(m, dtype=bool)
        exit_t = np.full(m, np.nan)
        vo = np.empty((m, rec.size))
        so = np.empty((m, rec.size))
        hits = 0
        j = 0
        if rec[0] == 0:
            vo[:, 0], so[:, 0] = v, s
            j = 1
        for k in range(n):
            z = _normals(rng, (2, m), False) if not config.antithetic else np.stack(
                [_normals(rng, (m,), True), _normals(rng, (m,), True)])
            v = v + (psi * v + lam * s) * dt + vol[k] * v * sq * z[0]
            s = s + xi * s * dt + eta * s * sq * z[1]
            for arr in (v, s):
                bad = arr <= 0
                if bad.any():
                    hits += int(bad.sum())
                    arr[bad] = FLOOR
            if domain is not None:
                out = alive & ((v >= domain[0]) | (s >= domain[1]))
                if out.any():
                    exit_t[out] = (k + 1) * dt
                    alive &= ~out
            while j < rec.size and rec[j] == k + 1:
                vo[:, j], so[:, j] = v, s
                j += 1
        return {"v": vo, "s": so, "alive": alive, "exit": exit_t, "hits": hits}

    res = _run_blocks(config, kernel)
    return PathEnsemble(
        times=rec * dt,
        paths=res["v"],
        companion=res["s"],
        alive=res["alive"] if domain is not None else None,
        first_passage=res["exit"] if domain is not None else None,
        meta={"kind": "fund", "constants": constants.to_dict(), "config": config.to_dict(),
              "v0": v0, "s0": s0, "initial_spread": list(initial_spread),
              "domain": None if domain is None else list(domain)},
        floor_hits=int(res["hits"]),
    )


def simulate_consumption(
    constants: CalibratedConstants,
    ratio: float,
    config: EulerConfig,
    phi_offset: float = 0.0,
    initial_spread: float = 0.0,
    x_max: float | None = None,
) -> PathEnsemble:
    """Retirement fund drawn down at a constant rate, in units of V_r.

    dx = (psi x - 1/ratio) dt + Phi(t + phi_offset) x dW,  x(0) = 1,
    where ``ratio`` = V_r / beta.  Paths are absorbed (frozen at 0) at the
    first crossing of 0; the crossing time is linearly interpolated inside
    the step.  With ``x_max`` a path reaching it is removed as well, which
    mirrors a zero far boundary.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    fw = FwApproximation.from_constants(constants)
    n = config.n_steps
    dt = config.dt
    sq = math.sqrt(dt)
    vol = np.sqrt(fw_phi_squared(fw, phi_offset + dt * np.arange(n)))
    psi = constants.psi
    drain = 0.0 if math.isinf(ratio) else 1.0 / ratio
    rec = config.record_steps()

    def kernel(rng, m):
        x = np.ones(m)
        if initial_spread > 0:
            x = x + initial_spread * rng.standard_normal(m)
        alive = x > 0
        tau = np.where(alive, np.nan, 0.0)
        upper = np.zeros(m, dtype=bool)
        x[~alive] = 0.0
        out = np.empty((m, rec.size))
        j = 0
        if rec[0] == 0:
            out[:, 0] = x
            j = 1
        for k in range(n):
            z = _normals(rng, (m,), config.antithetic)
            new = x + (psi * x - drain) * dt + vol[k] * x * sq * z
            hit = alive & (new <= 0)
            if hit.any():
                frac = x[hit] / (x[hit] - new[hit])
                tau[hit] = (k + frac) * dt
                new[hit] = 0.0
            if x_max is not None:
                top = alive & ~hit & (new >= x_max)
                if top.any():
                    tau[top] = (k + 1) * dt
                    upper |= top
                    hit |= top
            alive &= ~hit
            new[~alive] = 0.0
            x = new
            while j < rec.size and rec[j] == k + 1:
                out[:, j] = x
                j += 1
        return {"paths": out, "tau": tau, "alive": alive, "upper": upper}

    res = _run_blocks(config, kernel)
    return PathEnsemble(
        times=rec * dt,
        paths=res["paths"],
        first_passage=res["tau"],
        alive=res["alive"],
        meta={"kind": "consumption", "ratio": ratio, "phi_offset": phi_offset,
              "initial_spread": initial_spread, "x_max": x_max,
              "constants": constants.to_dict(), "config": config.to_dict()},
        diagnostics={"upper_exits": int(res["upper"].sum())},
    )


def _horizon(ens: PathEnsemble) -> float:
    return float(ens.meta["config"]["horizon"])


def mc_estimate(ensemble: PathEnsemble, functional: str, **kw) -> Estimate:
    """Plug-in estimate with standard error.

    functional: ``exceedance`` (y, t=None), ``survival`` (t), ``mfpt``,
    ``cdf`` (grid, t=None), ``mean`` (t=None) or ``variance`` (t=None).
    Exceedance counts only paths still inside the domain, so it estimates
    the same quantity as the solver's interior integral.
    """
    n = ensemble.n_paths
    if n == 0:
        raise ValueError("empty ensemble")
    if functional in ("survival", "mfpt") and ensemble.first_passage is None:
        raise ValueError(f"functional {functional!r} needs an ensemble with a boundary")

    if functional == "exceedance":
        col = ensemble.paths[:, ensemble.column(kw.get("t"))]
        inside = _inside(ensemble, kw.get("t"))
        p = float(np.mean(inside & (col > kw["y"])))
        return Estimate(p, math.sqrt(p * (1 - p) / n), n)
    if functional == "survival":
        t = kw["t"]
        if t > _horizon(ensemble) + 1e-12:
            raise ValueError("survival time beyond the simulated horizon")
        tau = ensemble.first_passage
        p = float(np.mean(np.isnan(tau) | (tau > t)))
        return Estimate(p, math.sqrt(p * (1 - p) / n), n)
    if functional == "mfpt":
        h = _horizon(ensemble)
        tau = ensemble.first_passage
        censored = np.isnan(tau)
        vals = np.where(censored, h, tau)
        return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0, n,
                        {"censored_fraction": float(censored.mean()), "horizon": h,
                         "lower_bound": bool(censored.any())})
    if functional == "cdf":
        grid = np.asarray(kw["grid"], dtype=float)
        col = ensemble.paths[:, ensemble.column(kw.get("t"))]
        inside = _inside(ensemble, kw.get("t"))
        p = np.mean(inside[:, None] & (col[:, None] <= grid[None, :]), axis=0)
        return Estimate(p, np.sqrt(p * (1 - p) / n), n)
    if functional in ("mean", "variance"):
        col = ensemble.paths[:, ensemble.column(kw.get("t"))]
        m = float(col.mean())
        if functional == "mean":
            return Estimate(m, float(col.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0, n)
        d = col - m
        var = float(np.mean(d**2) * n / (n - 1))
        m4 = float(np.mean(d**4))
        return Estimate(var, math.sqrt(max(m4 - var**2, 0.0) / n), n)
    raise ValueError(f"unknown functional {functional!r}")


def _inside(ens: PathEnsemble, t: float | None) -> np.ndarray:
    if ens.first_passage is None:
        return np.ones(ens.n_paths, dtype=bool)
    t = float(ens.times[ens.column(t)])
    tau = ens.first_passage
    return np.isnan(tau) | (tau > t)


def export_ensemble_csv(ensemble: PathEnsemble, path: str | Path) -> None:
    """Long-format dump ``path,t,value`` for debugging."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "t", "value"])
        for i, row in enumerate(ensemble.paths):
            for t, v in zip(ensemble.times, row):
                w.writerow([i, repr(float(t)), repr(float(v))])


def summary_json(estimate: Estimate, ensemble: PathEnsemble) -> str:
    cfg = ensemble.meta.get("config", {})
    doc = {"estimate": estimate.to_dict(), "seed": cfg.get("seed"), "meta": ensemble.meta,
           "floor_hits": ensemble.floor_hits, "diagnostics": ensemble.diagnostics}
    return json.dumps(doc, indent=2, sort_keys=True)
