"""Command-line front end.

Every command writes a JSON report (config, config hash, seed, version,
diagnostics, results) plus CSV data files into ``--out``.  Reports carry no
timestamps, so identical config and seed give byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, presets
from .estimation import (
    IngestionError,
    cpi_adjust,
    estimate_side,
    extract_constants,
    filter_outliers,
    read_cpi_csv,
    read_panel_csv,
    synth_gbm_panel,
    write_cpi_csv,
    write_panel_csv,
    CpiSeries,
)
from .fpe import (
    FpeSolveError,
    Grid1D,
    Grid2D,
    exceedance_from_density,
    initial_density,
    mfpt_from_survival,
    solve_fpe_1d,
    solve_fpe_2d,
    summary_dict,
    survival_at,
    survival_curve,
    write_checkpoints_csv,
)
from .model import CalibratedConstants
from .montecarlo import EulerConfig, mc_estimate, simulate_consumption, simulate_fund, simulate_index_average
from .pension import (
    LifeTable,
    consumption_survival,
    consumption_survival_table,
    mfpt_table,
    mortality_table,
    pension_size_table,
    solve_accumulation,
)

CONFIG_HELP = """\
config file (INI), all keys optional:
  [constants]  psi, phi, xi, eta, lambda_contrib, n_constituents
  [grid2d]     dh, n_v, dm, n_s, dk
  [grid1d]     dx, n, dk
  [mc]         n_paths, dt, block_size, workers, antithetic
  [paths]      panel, salary_panel, cpi, salary_cpi, life_table
--paper-defaults ignores [constants], [grid2d] and [grid1d] and uses the
calibrated constants, the default grids and the standard table parameter sets.
"""

MC_DEFAULTS = {"n_paths": 100_000, "dt": 0.01, "block_size": 8192, "workers": 1, "antithetic": False}
CONSISTENCY_PP = 0.015
CONSISTENCY_SE = 3.0
CONSISTENCY_YEARS = 0.5


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    out: str = "."
    paper_defaults: bool = False
    constants: dict = field(default_factory=dict)
    grid2d: dict = field(default_factory=dict)
    grid1d: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        # where results go and how many threads make them do not change what they are
        d = asdict(self)
        d.pop("out")
        d["mc"] = {k: v for k, v in d["mc"].items() if k != "workers"}
        return json.loads(json.dumps(d, sort_keys=True, default=_jsonable))

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def build_constants(self) -> CalibratedConstants:
        base = CalibratedConstants.paper_defaults()
        return base if self.paper_defaults else base.replace(**self.constants)

    def build_grid2d(self) -> Grid2D:
        if self.options.get("coarse_grid"):
            return Grid2D.table_grid()
        return Grid2D() if self.paper_defaults else Grid2D(**self.grid2d)

    def build_grid1d(self) -> Grid1D:
        if self.options.get("coarse_grid"):
            return Grid1D.coarse()
        return Grid1D() if self.paper_defaults else Grid1D(**self.grid1d)

    def mc_value(self, key: str):
        return self.mc.get(key, MC_DEFAULTS[key])


def _jsonable(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


_INT_KEYS = {"n_constituents", "n_v", "n_s", "n", "n_paths", "block_size", "workers"}


def _parse_value(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key == "antithetic":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return float(raw)


def read_config(path) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise IngestionError(f"{path}: config file not found")
    allowed = {
        "constants": {"psi", "phi", "xi", "eta", "lambda_contrib", "n_constituents"},
        "grid2d": {"dh", "n_v", "dm", "n_s", "dk"},
        "grid1d": {"dx", "n", "dk"},
        "mc": set(MC_DEFAULTS),
        "paths": {"panel", "salary_panel", "cpi", "salary_cpi", "life_table"},
    }
    out = {}
    for sec in cp.sections():
        if sec not in allowed:
            raise IngestionError(f"{path}: unknown section [{sec}]")
        vals = {}
        for k, v in cp.items(sec):
            if k not in allowed[sec]:
                raise IngestionError(f"{path}: unknown key {k!r} in [{sec}]")
            try:
                vals[k] = v if sec == "paths" else _parse_value(k, v)
            except ValueError:
                raise IngestionError(f"{path}: [{sec}] {k} = {v!r} is not a number") from None
        out[sec] = vals
    return out


# --- output -----------------------------------------------------------------


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable, allow_nan=True) + "\n")


def _write_rows(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else v


def _report(cfg: RunConfig, name: str, results, diagnostics=None, extra=None) -> dict:
    doc = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "version": __version__,
        "diagnostics": diagnostics or {},
        "results": results,
    }
    if extra:
        doc.update(extra)
    out = Path(cfg.out)
    _write_json(out / f"{name}.json", doc)
    return doc


def _floats(text: str | None, what: str) -> list[float] | None:
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise ValueError(f"{what}: expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text: str | None, what: str) -> list[int] | None:
    vals = _floats(text, what)
    return None if vals is None else [int(v) for v in vals]


def _pct(p: float) -> str:
    return f"{100 * p:7.2f}%"


# --- commands ---------------------------------------------------------------


def cmd_estimate(cfg: RunConfig) -> int:
    o = cfg.options
    panel_path = o.get("panel") or cfg.paths.get("panel")
    if not panel_path:
        raise ValueError("estimate needs --panel (or [paths] panel)")
    stock = read_panel_csv(panel_path, o["period"])
    cpi_path = o.get("cpi") or cfg.paths.get("cpi")
    if cpi_path:
        cpi = read_cpi_csv(cpi_path)
        stock = cpi_adjust(stock, cpi, o.get("cpi_base") if o.get("cpi_base") is not None else cpi.t0)
    if o["vol_drop"] or o["growth_drop"]:
        stock = filter_outliers(stock, o["vol_drop"], o["growth_drop"])
    stock_surf = estimate_side(stock, o["bin_width"], o["weighting"])

    sal_path = o.get("salary_panel") or cfg.paths.get("salary_panel")
    base = cfg.build_constants()
    if sal_path:
        salary = read_panel_csv(sal_path, o["salary_period"])
        scpi_path = o.get("salary_cpi") or cfg.paths.get("salary_cpi")
        if scpi_path:
            scpi = read_cpi_csv(scpi_path)
            salary = cpi_adjust(salary, scpi, scpi.t0)
        sal_surf = estimate_side(salary, o["salary_bin_width"], o["weighting"])
    else:
        sal_surf = None

    if sal_surf is None:
        est = extract_constants(stock_surf, stock_surf, o["window"], base.lambda_contrib, base.n_constituents)
        est = est.replace(xi=base.xi, eta=base.eta)
    else:
        est = extract_constants(stock_surf, sal_surf, o["window"], base.lambda_contrib, base.n_constituents)

    out = Path(cfg.out)
    cols = ["tau", "x_center", "count", "a", "b2"]
    _write_rows(out / "stock_surface.csv", stock_surf.to_rows(), cols)
    if sal_surf is not None:
        _write_rows(out / "salary_surface.csv", sal_surf.to_rows(), cols)
    diag = {"stock_trajectories": len(stock), "salary_trajectories": None if sal_surf is None else len(salary),
            "salary_source": "panel" if sal_surf is not None else "config"}
    _report(cfg, "constants", est.to_dict(), diag)
    print(json.dumps(est.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    o = cfg.options
    c = cfg.build_constants()
    horizon = o["horizon"]
    if horizon is None:
        horizon = 120.0 if o["kind"] == "consumption" else 25.0
    rec = tuple(float(t) for t in range(0, int(math.floor(horizon)) + 1))
    if rec[-1] != horizon:
        rec = rec + (horizon,)
    ec = EulerConfig(dt=cfg.mc_value("dt"), horizon=horizon, n_paths=cfg.mc_value("n_paths"), seed=cfg.seed,
                     antithetic=cfg.mc_value("antithetic"), record_times=rec,
                     workers=cfg.mc_value("workers"), block_size=cfg.mc_value("block_size"))
    results = {}
    if o["kind"] == "consumption":
        ens = simulate_consumption(c, o["ratio"], ec, initial_spread=o["spread"])
        rows = [{"t": t, **_est(mc_estimate(ens, "survival", t=t))} for t in rec]
        results["mfpt"] = mc_estimate(ens, "mfpt").to_dict()
        _write_rows(Path(cfg.out) / "simulate_survival.csv", rows, ["t", "value", "se"])
    else:
        if o["kind"] == "fund":
            ens = simulate_fund(c, ec, initial_spread=(o["spread"], o["spread"]))
        else:
            ens = simulate_index_average(c.n_constituents, c, ec)
        rows = [{"t": t, "mean": mc_estimate(ens, "mean", t=t).value,
                 "variance": mc_estimate(ens, "variance", t=t).value} for t in rec]
        for y in _floats(o.get("ratios"), "--ratios") or []:
            results[f"exceedance_{y!r}"] = mc_estimate(ens, "exceedance", y=y, t=horizon).to_dict()
        _write_rows(Path(cfg.out) / "simulate_moments.csv", rows, ["t", "mean", "variance"])
    results["rows"] = rows
    diag = {"floor_hits": ens.floor_hits, **ens.diagnostics}
    _report(cfg, "simulate", results, diag, {"mc": ec.to_dict()})
    for r in rows:
        print("  ".join(f"{k}={_fmt(v)}" for k, v in r.items()))
    return 0


def _est(e) -> dict:
    return {"value": e.value, "se": e.se}


def cmd_solve(cfg: RunConfig) -> int:
    o = cfg.options
    c = cfg.build_constants()
    checkpoints = _floats(o.get("checkpoints"), "--checkpoints") or [o["horizon"]]
    out = Path(cfg.out)
    if o["kind"] == "accumulation":
        grid = cfg.build_grid2d()
        ic = initial_density(grid, (1.0, 1.0), (o["sigma"], o["sigma"]))
        res = solve_fpe_2d(c, grid, ic, o["horizon"], checkpoints=checkpoints)
        results = {}
        for y in _floats(o.get("ratios"), "--ratios") or []:
            results[f"exceedance_{y!r}"] = exceedance_from_density(res.field_at(o["horizon"]), y).to_dict()
    else:
        grid = cfg.build_grid1d()
        res = solve_fpe_1d(c, o["ratio"], grid, o["horizon"], checkpoints=checkpoints, sigma=o["sigma"])
        t, s = survival_curve(res)
        rep = mfpt_from_survival(t, s)
        results = {"mfpt": rep.to_dict()}
        stride = max(1, int(round(0.1 / grid.dk)))
        _write_rows(out / "solve_survival.csv",
                    [{"t": float(tt), "survival": float(ss)} for tt, ss in zip(t[::stride], s[::stride])],
                    ["t", "survival"])
    write_checkpoints_csv(res, out / "solve_density.csv")
    summ = summary_dict(res)
    _report(cfg, "solve", results, summ.get("diagnostics"), {"solver": summ})
    print(json.dumps(results, indent=2, sort_keys=True, default=_jsonable))
    return 0


def cmd_tables(cfg: RunConfig) -> int:
    o = cfg.options
    c = cfg.build_constants()
    kind = o["kind"]
    out = Path(cfg.out)
    ratios = _floats(o.get("ratios"), "--ratios")
    years = _ints(o.get("years"), "--years")
    diag: dict = {}

    if kind == "pension":
        if years is None:
            if not cfg.paper_defaults:
                raise ValueError("tables pension needs --years (or --paper-defaults)")
            years = sorted(presets.PENSION_RATIOS)
        plan = []
        for y in years:
            rs = ratios if ratios is not None else presets.PENSION_RATIOS.get(y) if cfg.paper_defaults else None
            if rs is None:
                raise ValueError(f"no ratio list for {y} years; give --ratios")
            plan.append((y, list(rs)))
        rows = []
        wanted = [y for y, rs in plan if rs]
        if wanted:
            grid = cfg.build_grid2d()
            sol = solve_accumulation(c, grid, wanted)
            diag = sol.diagnostics
            for y, rs in plan:
                rows += pension_size_table(y, rs, c, grid, solution=sol)
        cols = ["years", "ratio", "implied_return", "probability", "probability_renormalized"]
        for r in rows:
            print(f"{r['years']:3d}y  ratio {r['ratio']:6.2f}  return {100 * r['implied_return']:5.2f}%  "
                  f"Pr {_pct(r['probability'])}")

    elif kind == "survival":
        if ratios is None:
            if not cfg.paper_defaults:
                raise ValueError("tables survival needs --ratios (or --paper-defaults)")
            ratios = list(presets.SURVIVAL_YEARS)
        rows = []
        for r in ratios:
            ys = years if years is not None else presets.SURVIVAL_YEARS.get(r) if cfg.paper_defaults else None
            if ys is None:
                raise ValueError(f"no year list for ratio {r}; give --years")
            rows += consumption_survival_table(r, ys, c, cfg.build_grid1d(), o["horizon"])
        cols = ["ratio", "years", "irr", "survival"]
        for r in rows:
            print(f"ratio {r['ratio']:6.2f}  {r['years']:3d}y  IRR {100 * r['irr']:5.2f}%  S {_pct(r['survival'])}")

    elif kind == "mfpt":
        if ratios is None:
            if not cfg.paper_defaults:
                raise ValueError("tables mfpt needs --ratios (or --paper-defaults)")
            ratios = list(presets.CONSUMPTION_RATIOS)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rows = mfpt_table(ratios, c, cfg.build_grid1d(), o["horizon"])
        diag = {"warnings": [str(w.message) for w in caught]}
        cols = ["ratio", "mfpt", "tail_share", "horizon_warning"]
        for r in rows:
            print(f"ratio {r['ratio']:6.2f}  MFPT {r['mfpt']:6.2f} years")

    elif kind == "mortality":
        if ratios is None:
            if not cfg.paper_defaults:
                raise ValueError("tables mortality needs --ratios (or --paper-defaults)")
            ratios = list(presets.CONSUMPTION_RATIOS)
        ages = [o["age"]] if o.get("age") is not None else list(presets.MORTALITY_AGES)
        lt_path = o.get("life_table") or cfg.paths.get("life_table")
        table = LifeTable.from_csv(lt_path) if lt_path else LifeTable.us_2003()
        rows = []
        for a in ages:
            rows += mortality_table(a, ratios, c, table, cfg.build_grid1d(), o["horizon"])
        cols = ["age", "ratio", "probability"]
        for r in rows:
            print(f"age {r['age']}  ratio {r['ratio']:6.2f}  Pr(outlives) {_pct(r['probability'])}")
    else:
        raise ValueError(f"unknown table kind {kind!r}")

    _write_rows(out / f"table_{kind}.csv", rows, cols)
    _report(cfg, f"table_{kind}", rows, diag, {"columns": cols})
    return 0


def _compare_prob(fpe: float, est) -> dict:
    tol = max(CONSISTENCY_PP, CONSISTENCY_SE * est.se)
    return {"fpe": fpe, "mc": est.value, "mc_se": est.se, "tolerance": tol, "pass": abs(fpe - est.value) <= tol}


def _compare_mfpt(fpe: float, est) -> dict:
    return {"fpe": fpe, "mc": est.value, "mc_se": est.se, "tolerance": CONSISTENCY_YEARS,
            "pass": abs(fpe - est.value) <= CONSISTENCY_YEARS}


def _coarsened_1d(grid: Grid1D, k: int) -> Grid1D:
    return grid if k == 1 else Grid1D(dx=grid.dx * k, n=max(grid.n // k, 2), dk=grid.dk)


def _coarsened_2d(grid: Grid2D, k: int) -> Grid2D:
    return grid if k == 1 else Grid2D(dh=grid.dh * k, n_v=max(grid.n_v // k, 2), dm=grid.dm,
                                      n_s=grid.n_s, dk=grid.dk)


def cmd_crosscheck(cfg: RunConfig) -> int:
    o = cfg.options
    c = cfg.build_constants()
    q = o["question"]
    k = o["coarsen"]
    checks = []
    ec_kw = dict(n_paths=cfg.mc_value("n_paths"), seed=cfg.seed, workers=cfg.mc_value("workers"),
                 block_size=cfg.mc_value("block_size"), antithetic=cfg.mc_value("antithetic"))

    if q in ("survival", "mfpt", "drain"):
        ratio = o["ratio"]
        if q == "drain":
            c = c.replace(psi=0.0, phi=0.0)
        grid = _coarsened_1d(cfg.build_grid1d(), k)
        years = _ints(o.get("years"), "--years")
        if years is None:
            years = list(presets.SURVIVAL_YEARS.get(ratio, ())) if q == "survival" else []
        t, s, fdiag = consumption_survival(c, ratio, grid, o["horizon"], sigma=o["sigma"])
        ec = EulerConfig(dt=cfg.mc.get("dt", 0.01), horizon=o["horizon"], record_times=(o["horizon"],), **ec_kw)
        ens = simulate_consumption(c, ratio, ec, initial_spread=o["sigma"], x_max=grid.x_max)
        for y in years:
            checks.append({"quantity": f"survival({y})", **_compare_prob(float(survival_at(t, s, y)),
                                                                     mc_estimate(ens, "survival", t=y))})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = mfpt_from_survival(t, s)
        if q != "survival":
            checks.append({"quantity": "mfpt", **_compare_mfpt(rep.value, mc_estimate(ens, "mfpt"))})
        grid_doc = grid.to_dict()
    elif q == "exceedance":
        grid = _coarsened_2d(cfg.build_grid2d(), k)
        years = _ints(o.get("years"), "--years") or [25]
        horizon = max(years)
        ratios = _floats(o.get("ratios"), "--ratios")
        if ratios is None:
            ratios = list(presets.PENSION_RATIOS.get(horizon, (3.0, 4.0, 5.0)))
        sol = solve_accumulation(c, grid, years, o["sigma"])
        fdiag = sol.diagnostics
        ec = EulerConfig(dt=cfg.mc.get("dt", 0.02), horizon=horizon, record_times=tuple(float(y) for y in years),
                         **ec_kw)
        ens = simulate_fund(c, ec, initial_spread=(o["sigma"], o["sigma"]), domain=grid.extent)
        for y in years:
            field = sol.field_at(y)
            for r in ratios:
                checks.append({"quantity": f"exceedance({r!r}, {y})",
                               **_compare_prob(exceedance_from_density(field, r).raw,
                                               mc_estimate(ens, "exceedance", y=r, t=y))})
        grid_doc = grid.to_dict()
    else:
        raise ValueError(f"unknown crosscheck question {q!r}")

    ok = all(ch["pass"] for ch in checks)
    for ch in checks:
        print(f"{ch['quantity']:>22s}  FPE {ch['fpe']:.5f}  MC {ch['mc']:.5f} (se {ch['mc_se']:.5f})  "
              f"{'pass' if ch['pass'] else 'FAIL'}")
    print("crosscheck", "passed" if ok else "FAILED")
    _report(cfg, "crosscheck", {"checks": checks, "pass": ok}, dict(fdiag),
            {"grid": grid_doc, "mc": ec.to_dict()})
    return 0 if ok else 1


def cmd_synth(cfg: RunConfig) -> int:
    o = cfg.options
    out = Path(cfg.out) / o["file"]
    if o["kind"] == "panel":
        panel = synth_gbm_panel(o["paths"], o["horizon"], o["drift"], o["vol"], cfg.seed, o["period"])
        write_panel_csv(panel, out)
    else:
        levels = 100.0 * np.exp(o["drift"] * np.arange(o["horizon"] + 1))
        write_cpi_csv(CpiSeries(0, levels), out)
    print(out)
    return 0


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "tables": cmd_tables,
    "crosscheck": cmd_crosscheck,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochpension", description="Stochastic pension fund model.",
                                epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="INI config file (keys listed below)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--paper-defaults", action="store_true",
                   help="calibrated constants, default grids and standard table parameter sets")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate model constants from panels")
    e.add_argument("--panel", help="stock panel CSV (id,t,value)")
    e.add_argument("--period", choices=["month", "year"], default="month")
    e.add_argument("--cpi", help="CPI CSV (t,index) for the stock panel")
    e.add_argument("--cpi-base", type=int, help="CPI base period (default: first CPI period)")
    e.add_argument("--salary-panel", help="salary panel CSV; without it xi, eta come from the config")
    e.add_argument("--salary-period", choices=["month", "year"], default="year")
    e.add_argument("--salary-cpi", help="CPI CSV for the salary panel")
    e.add_argument("--bin-width", type=float, default=0.25, help="stock x-bin width")
    e.add_argument("--salary-bin-width", type=float, default=0.5)
    e.add_argument("--weighting", choices=["precision", "count"], default="precision")
    e.add_argument("--window", type=float, default=0.5, help="moving-average window fraction")
    e.add_argument("--vol-drop", type=float, default=0.0, help="fraction of most volatile trajectories dropped")
    e.add_argument("--growth-drop", type=float, default=0.0, help="fraction of fastest growers dropped")

    s = sub.add_parser("simulate", help="Monte Carlo ensembles")
    s.add_argument("--kind", choices=["fund", "consumption", "index"], default="fund")
    s.add_argument("--horizon", type=float,
                   help="years (default 120 for consumption so the MFPT is rarely censored, else 25)")
    s.add_argument("--ratio", type=float, default=10.0, help="consumption ratio")
    s.add_argument("--ratios", help="comma-separated exceedance levels (fund/index)")
    s.add_argument("--spread", type=float, default=0.0, help="std of the Gaussian start point")

    v = sub.add_parser("solve", help="Fokker-Planck solve")
    v.add_argument("--kind", choices=["accumulation", "consumption"], default="accumulation")
    v.add_argument("--horizon", type=float, default=25.0)
    v.add_argument("--ratio", type=float, default=10.0, help="consumption ratio")
    v.add_argument("--ratios", help="comma-separated exceedance levels (accumulation)")
    v.add_argument("--checkpoints", help="comma-separated checkpoint times")
    v.add_argument("--sigma", type=float, default=0.05, help="initial density width")
    v.add_argument("--coarse-grid", action="store_true", help="use the coarse table grid")

    t = sub.add_parser("tables", help="result tables")
    t.add_argument("kind", choices=["pension", "survival", "mfpt", "mortality"])
    t.add_argument("--years", help="comma-separated years")
    t.add_argument("--ratios", help="comma-separated ratios (empty string for an empty table)")
    t.add_argument("--age", type=int, help="retirement age (mortality)")
    t.add_argument("--life-table", help="life table CSV (age,q,l,d,L,T,e)")
    t.add_argument("--horizon", type=float, default=60.0, help="consumption solve horizon")
    t.add_argument("--coarse-grid", action="store_true", help="use the coarse table grids")

    x = sub.add_parser("crosscheck", help="solver vs Monte Carlo on one question")
    x.add_argument("question", choices=["survival", "mfpt", "drain", "exceedance"])
    x.add_argument("--ratio", type=float, default=10.0)
    x.add_argument("--ratios", help="exceedance levels")
    x.add_argument("--years", help="comma-separated times")
    x.add_argument("--horizon", type=float, default=60.0)
    x.add_argument("--sigma", type=float, default=0.05)
    x.add_argument("--coarsen", type=int, default=1, help="multiply the space step by this factor")
    x.add_argument("--coarse-grid", action="store_true")

    y = sub.add_parser("synth", help="write synthetic fixtures")
    y.add_argument("--kind", choices=["panel", "cpi"], default="panel")
    y.add_argument("--paths", type=int, default=1000)
    y.add_argument("--horizon", type=int, default=504)
    y.add_argument("--drift", type=float, default=0.0027)
    y.add_argument("--vol", type=float, default=0.1)
    y.add_argument("--period", choices=["month", "year"], default="month")
    y.add_argument("--file", default="panel.csv")
    return p


_GLOBAL = {"config", "seed", "out", "paper_defaults", "command"}


def make_config(args: argparse.Namespace) -> RunConfig:
    sections = read_config(args.config) if args.config else {}
    opts = {k: v for k, v in vars(args).items() if k not in _GLOBAL}
    return RunConfig(command=args.command, seed=args.seed, out=args.out, paper_defaults=args.paper_defaults,
                     options=opts, **sections)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except (IngestionError, FpeSolveError, ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
