"""Command-line front end: ``jflow <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 positivity loss, 3 stuck
continuation, 4 a verification check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dhym, lattice as lat, projcheck, vortexcfg, vortexsolve
from .lattice import as_rational, format_rational

log = logging.getLogger("jflow")

EXIT_OK, EXIT_CONFIG, EXIT_POSITIVITY, EXIT_STUCK, EXIT_VERIFY = 0, 1, 2, 3, 4

SUBCOMMANDS = ("stability", "vortex-window", "vortex-check", "vortex-solve", "projective", "dhym", "sweep")

DEFAULT_EPS = "1e-1,1e-1.5,1e-2,1e-2.5,1e-3"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic serialisation


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(obj)
    return obj


class _Float(float):
    pass


def dumps(obj) -> str:
    """JSON with every float printed to 17 significant digits."""

    def enc(o, indent=0):
        pad = "  " * (indent + 1)
        end = "  " * indent
        if isinstance(o, _Float):
            s = fmt_float(o)
            return s if s not in ("nan", "inf", "-inf") else json.dumps(s)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, indent + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, indent + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, indent + 1) for v in o) + "\n" + end + "]"
        return json.dumps(o)

    return enc(_to_jsonable(obj)) + "\n"


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output_dir: str | None = None
    grid: int | None = None
    tol: float | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        allowed = PARAM_KEYS[self.subcommand]
        unknown = sorted(set(self.parameters) - allowed)
        if unknown:
            raise ConfigError(f"unknown keys for {self.subcommand}: {', '.join(unknown)}")

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "parameters": dict(self.parameters),
                "output_dir": self.output_dir, "grid": self.grid, "tol": self.tol}

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        extra = set(doc) - {"subcommand", "parameters", "output_dir", "grid", "tol"}
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(doc["subcommand"], dict(doc.get("parameters", {})), doc.get("output_dir"),
                   doc.get("grid"), doc.get("tol"))


PARAM_KEYS = {
    "stability": {"input"},
    "vortex-window": {"r1", "r2"},
    "vortex-check": {"r1", "r2", "s"},
    "vortex-solve": {"r1", "r2", "s", "lambda2", "allow_inadmissible"},
    "projective": {"n"},
    "dhym": {"from_dir", "eps"},
    "sweep": {"r1", "r2", "s", "lambda2", "workers", "dhym"},
}
COMMON_KEYS = {"output_dir", "grid", "tol"}

DEFAULTS = {
    "lambda2": "2/5",
    "grid": 1024,
    "tol": 1e-9,
    "eps": DEFAULT_EPS,
    "workers": 1,
    "dhym": False,
    "allow_inadmissible": False,
}


def _positive_int(name, value) -> int:
    try:
        v = int(str(value))
    except ValueError:
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
    if v < 1:
        raise ConfigError(f"{name}: must be positive")
    return v


def _rational(name, value) -> Fraction:
    try:
        return as_rational(str(value) if not isinstance(value, Fraction) else value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"{name}: malformed rational {value!r} ({exc})") from None


def _real(name, value) -> float:
    try:
        text = str(value)
        return float(_rational(name, text)) if "/" in text else float(text)
    except (ValueError, ConfigError):
        raise ConfigError(f"{name}: malformed number {value!r}") from None


def _list(name, value, conv):
    items = [v for v in str(value).split(",") if v.strip()]
    if not items:
        raise ConfigError(f"{name}: empty list")
    return [conv(name, v.strip()) for v in items]


def _eps_value(name, text) -> float:
    # accepts "1e-2.5" as 10^-2.5
    t = text.strip().lower()
    try:
        if "e" in t:
            mant, exp = t.split("e", 1)
            return float(mant or 1) * 10 ** float(exp)
        return float(t)
    except ValueError:
        raise ConfigError(f"{name}: malformed value {text!r}") from None


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (exit_code, report)


def _out_dir(cfg: RunConfig) -> Path | None:
    if cfg.output_dir is None:
        return None
    p = Path(cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _parse_class(lattice, value, classes, what):
    if isinstance(value, str):
        if value not in classes:
            raise ConfigError(f"{what}: unknown class {value!r}")
        return classes[value]
    if len(value) != lattice.rank:
        raise ConfigError(f"{what}: expected {lattice.rank} coefficients")
    return lattice.cls(*[_rational(what, v) for v in value])


def load_stability_document(doc: dict):
    allowed = {"lattice", "classes", "sheaves", "curves", "omega", "L", "tests", "k_samples"}
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"unknown keys in stability input: {', '.join(sorted(extra))}")
    try:
        lt = doc["lattice"]
        lattice = lat.SurfaceLattice.from_rows(lt["basis"], [[_rational("gram", v) for v in row] for row in lt["gram"]])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"lattice: {exc}") from None
    classes: dict = {}
    for name, val in doc.get("classes", {}).items():
        classes[name] = _parse_class(lattice, val, classes, f"classes.{name}")
    sheaves = {}
    for name, val in doc.get("sheaves", {}).items():
        try:
            sheaves[name] = lat.SheafChern(
                _rational(f"sheaves.{name}.rank", val["rank"]),
                _parse_class(lattice, val["ch1"], classes, f"sheaves.{name}.ch1"),
                _rational(f"sheaves.{name}.ch2", val["ch2"]),
            )
        except KeyError as exc:
            raise ConfigError(f"sheaves.{name}: missing {exc}") from None
    curves = [_parse_class(lattice, c, classes, "curves") for c in doc.get("curves", [])]
    if "omega" not in doc:
        raise ConfigError("stability input needs 'omega'")
    omega = _parse_class(lattice, doc["omega"], classes, "omega")
    L = _parse_class(lattice, doc["L"], classes, "L") if "L" in doc else None
    tests = doc.get("tests", [])
    for t in tests:
        for key in ("S", "E"):
            if t.get(key) not in sheaves:
                raise ConfigError(f"tests: unknown sheaf {t.get(key)!r}")
    ks = [int(k) for k in doc.get("k_samples", [100, 1000])]
    return lattice, classes, sheaves, curves, omega, L, tests, ks


def run_stability(cfg: RunConfig):
    path = cfg.parameters.get("input")
    if not path:
        raise ConfigError("input: a JSON document is required")
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"input: {exc}") from None
    lattice, classes, sheaves, curves, omega, L, tests, ks = load_stability_document(doc)
    report: dict = {"sheaves": {}, "tests": []}
    ok = True
    for name, S in sheaves.items():
        pos = lat.positivity_check(S, omega)
        entry = {"ch2_positive": pos[0], "omega_ch1_positive": pos[1]}
        if S.ch2 > 0:
            entry["j_constant"] = lat.j_constant(S, omega)
        report["sheaves"][name] = entry
    for t in tests:
        S, E = sheaves[t["S"]], sheaves[t["E"]]
        row = {"S": t["S"], "E": t["E"], "j_stability": lat.j_stability_test(S, E, omega).value,
               "margin": lat.j_stability_margin(S, E, omega)}
        if L is not None:
            cmp = lat.asymptotic_compare(S, E, omega, L)
            row["asymptotic"] = cmp.verdict.value
            row["discrepancy_order"] = cmp.discrepancy_order
            try:
                row["see_saw"] = lat.see_saw_check(S, E, omega, L, ks)
                ok &= row["see_saw"]
            except ValueError as exc:
                row["see_saw"] = str(exc)
        report["tests"].append(row)
    if L is not None:
        cr = lat.eta_curve_test(omega, L, curves)
        report["eta"] = {"class": cr.eta.to_json(), "pairings": list(cr.pairings), "status": cr.status.value}
    return (EXIT_OK if ok else EXIT_VERIFY), report


def _vortex_params(p) -> vortexcfg.VortexParams:
    for key in ("r1", "r2"):
        if key not in p:
            raise ConfigError(f"{key}: required")
    r1, r2 = _positive_int("r1", p["r1"]), _positive_int("r2", p["r2"])
    s = _rational("s", p["s"]) if "s" in p else None
    if s is not None and s <= 0:
        raise ConfigError("s: must be positive")
    return vortexcfg.VortexParams(r1, r2, s if s is not None else Fraction(1))


def run_vortex_window(cfg: RunConfig):
    vp = _vortex_params(cfg.parameters)
    try:
        w = vortexcfg.admissible_window(vp.r1, vp.r2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = {"r1": vp.r1, "r2": vp.r2, "empty": w.empty,
              "lower": w.lower, "upper": w.upper, "upper_float": float(w.upper),
              "lower_enclosure": [float(w.lower_enclosure[0]), float(w.lower_enclosure[1])],
              "interval": "EMPTY" if w.empty else [w.lower, float(w.upper)]}
    return EXIT_OK, report


def run_vortex_check(cfg: RunConfig):
    if "s" not in cfg.parameters:
        raise ConfigError("s: required")
    rep = vortexcfg.check_report(_vortex_params(cfg.parameters))
    ok = rep["alpha_routes_agree"] and rep["kappa_routes_agree"]
    return (EXIT_OK if ok else EXIT_VERIFY), rep


def _problem(cfg: RunConfig, vp=None, lambda2=None) -> vortexsolve.Problem:
    vp = vp or _vortex_params(cfg.parameters)
    lam = lambda2 if lambda2 is not None else _real("lambda2", cfg.parameters.get("lambda2", DEFAULTS["lambda2"]))
    strict = not _bool(cfg.parameters.get("allow_inadmissible", False))
    try:
        return vortexsolve.Problem(vp, lam, cfg.grid or DEFAULTS["grid"], strict=strict)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"inadmissible problem: {exc}") from None


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).lower() in ("1", "true", "yes")


SOLUTION_COLUMNS = ["x", "psi", "q", "Fh_hat", "rho", "Ff_hat", "W", "res_hfS", "res_fS", "pI", "pII", "pV"]


def solve_problem(problem, tol):
    sched = vortexsolve.Schedule(tol=tol)
    sol = vortexsolve.continuation_solve(problem, sched)
    curv = vortexsolve.reduced_curvature(sol.psi, problem)
    rep = vortexsolve.verify_solution(curv, problem)
    return sol, curv, rep


def run_vortex_solve(cfg: RunConfig):
    problem = _problem(cfg)
    tol = cfg.tol if cfg.tol is not None else DEFAULTS["tol"]
    out = _out_dir(cfg)
    try:
        sol, curv, rep = solve_problem(problem, tol)
    except vortexsolve.SolverError as exc:
        code = EXIT_POSITIVITY if isinstance(exc, vortexsolve.PositivityLoss) else EXIT_STUCK
        return code, {"error": exc.code, "message": str(exc), "last_t": exc.last_t}
    checks = rep.checks()
    checks["path_residual"] = sol.trace[-1].residual_sup <= tol
    checks["q_le_1"] = all(s.min_one_minus_q >= 0 for s in sol.trace)
    checks["f_defect"] = rep.defect <= 1e-6
    report = {
        "params": {"r1": problem.r1, "r2": problem.r2, "s": problem.params.s,
                   "lambda2": problem.lambda2, "grid": problem.N, "tol": tol},
        "c": problem.c_exact,
        "alpha": problem.alpha,
        "final_t": sol.trace[-1].t,
        "path_residual": sol.trace[-1].residual_sup,
        "max_psi_along_path": max(s.max_psi for s in sol.trace),
        "min_one_minus_q": min(s.min_one_minus_q for s in sol.trace),
        "jacobian_fd_error_max": max(sol.fd_errors) if sol.fd_errors else None,
        "verify": rep.to_json(),
        "checks": checks,
    }
    if out is not None:
        pos = rep.positivity
        cols = [curv.x, curv.psi, curv.q, curv.Fh_hat, curv.rho, curv.Ff_hat, curv.W,
                rep.res_hfS, rep.res_fS, pos["pI"], pos["pII"], pos["pV"]]
        rows = zip(*[np.asarray(c, dtype=float) for c in cols])
        write_csv(out / "solution.csv", SOLUTION_COLUMNS, rows)
        (out / "trace.json").write_text(dumps([s.to_json() for s in sol.trace]))
        np.savez(out / "state.npz", psi=np.asarray(curv.psi, dtype=np.longdouble),
                 rho=np.asarray(curv.rho, dtype=np.longdouble))
        (out / "report.json").write_text(dumps(report))
    return (EXIT_OK if all(checks.values()) else EXIT_VERIFY), report


def run_projective(cfg: RunConfig):
    n = _positive_int("n", cfg.parameters.get("n", 2))
    if n > projcheck.MAX_N:
        raise ConfigError(f"n: must be at most {projcheck.MAX_N}")
    rep = projcheck.report(n)
    ok = rep["j_residual_zero"] and rep.get("griffith_positive", True) and rep.get("gram_min_eig", 1.0) > 0
    return (EXIT_OK if ok else EXIT_VERIFY), rep


def load_solution(dirpath: Path):
    try:
        rep = json.loads((dirpath / "report.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"from_dir: cannot read report.json ({exc})") from None
    p = rep["params"]
    vp = vortexcfg.VortexParams(int(p["r1"]), int(p["r2"]), as_rational(p["s"]))
    problem = vortexsolve.Problem(vp, float(p["lambda2"]), int(p["grid"]))
    state = dirpath / "state.npz"
    if state.exists():
        z = np.load(state)
        psi, rho = z["psi"].astype(np.longdouble), z["rho"].astype(np.longdouble)
    else:
        data = np.genfromtxt(dirpath / "solution.csv", delimiter=",", names=True)
        psi, rho = data["psi"], data["rho"]
    rec = vortexsolve.recover_f(psi, problem)
    curv = vortexsolve.ReducedCurvature(
        x=problem.grid.x, psi=psi, q=vortexsolve.compute_q(psi, problem),
        Fh_hat=1.0 + vortexsolve.reduce_laplacian(psi, problem.grid),
        Ff_hat=rec.Ff_hat, W=vortexsolve.compute_W(psi, problem), rho=rho)
    return problem, curv


def dhym_table(problem, curv, eps_list):
    rows = []
    for e in sorted(eps_list, reverse=True):
        th = dhym.phase_for(problem).theta(e)
        pre = dhym.residual_sup(curv, problem, e)
        nr = dhym.newton_correction(curv, problem, e)
        rows.append((e, th, pre, nr.post))
    return rows


def run_dhym(cfg: RunConfig):
    src = cfg.parameters.get("from_dir")
    if not src:
        raise ConfigError("from_dir: required")
    eps_list = _list("eps", cfg.parameters.get("eps", DEFAULTS["eps"]), _eps_value)
    if any(not 0 < e <= 1 for e in eps_list):
        raise ConfigError("eps: values must lie in (0, 1]")
    problem, curv = load_solution(Path(src))
    try:
        dhym.calibrate(curv, problem)
    except RuntimeError as exc:
        return EXIT_VERIFY, {"error": "UNCALIBRATED", "message": str(exc)}
    rows = dhym_table(problem, curv, eps_list)
    eps = np.array([r[0] for r in rows])
    pre = np.array([r[2] for r in rows])
    post = np.array([r[3] for r in rows])
    report = {"eps": list(eps), "theta": [r[1] for r in rows], "res_sup": list(pre), "res_post_newton": list(post)}
    try:
        fit = dhym.scaling_fit(curv, problem, eps_list)
        report["slope"] = fit.slope
    except dhym.Inconclusive as exc:
        report["slope"] = None
        report["slope_error"] = str(exc)
    report["slope_post_newton"] = dhym.fit_slope(eps, post) if np.all(post > 0) else None
    report["branch_continuous"] = dhym.branch_continuous(dhym.phase_for(problem), eps_list)
    report["positivity_threshold"] = dhym.positivity_threshold(curv, problem, eps_list)
    out = _out_dir(cfg) or Path(src)
    write_csv(out / "dhym_scaling.csv", ["eps", "theta", "res_sup", "res_post_newton"], rows)
    ok = report["branch_continuous"]
    return (EXIT_OK if ok else EXIT_VERIFY), report


SWEEP_COLUMNS = ["r1", "r2", "s", "lambda2", "in_window", "alpha_gt_1", "outcome", "last_t", "path_residual",
                 "sup_res_hfS", "sup_res_fS", "integral_rel_error", "f_defect", "griffith_positive", "dhym_slope"]


def _sweep_row(args):
    r1, r2, s, lam, N, tol, with_dhym = args
    vp = vortexcfg.VortexParams(r1, r2, s)
    try:
        w = vortexcfg.admissible_window(r1, r2).contains(s).value
    except ValueError:
        w = "NO"
    try:
        a = vortexcfg.alpha_check(vp).alpha_gt_1
    except ZeroDivisionError:
        a = False
    row = {"r1": r1, "r2": r2, "s": format_rational(s), "lambda2": lam, "in_window": w, "alpha_gt_1": a,
           "outcome": "", "last_t": "", "path_residual": "", "sup_res_hfS": "", "sup_res_fS": "",
           "integral_rel_error": "", "f_defect": "", "griffith_positive": "", "dhym_slope": ""}
    try:
        problem = vortexsolve.Problem(vp, lam, N)
    except (ValueError, ZeroDivisionError):
        row["outcome"] = "INADMISSIBLE"
        return row
    try:
        sol, curv, rep = solve_problem(problem, tol)
    except vortexsolve.SolverError as exc:
        row["outcome"] = exc.code
        row["last_t"] = "" if exc.last_t is None else float(exc.last_t)
        return row
    row.update(outcome="SOLVED", last_t=1.0, path_residual=sol.trace[-1].residual_sup,
               sup_res_hfS=rep.sup_hfS, sup_res_fS=rep.sup_fS, integral_rel_error=rep.integral_rel_error,
               f_defect=rep.defect, griffith_positive=rep.griffith_positive)
    if with_dhym:
        try:
            row["dhym_slope"] = dhym.scaling_fit(curv, problem, [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3]).slope
        except (dhym.Inconclusive, RuntimeError) as exc:
            row["dhym_slope"] = type(exc).__name__
    return row


def run_sweep(cfg: RunConfig):
    p = cfg.parameters
    for key in ("r1", "r2", "s"):
        if key not in p:
            raise ConfigError(f"{key}: required")
    r1s = _list("r1", p["r1"], _positive_int)
    r2s = _list("r2", p["r2"], _positive_int)
    ss = _list("s", p["s"], _rational)
    lams = _list("lambda2", p.get("lambda2", DEFAULTS["lambda2"]), _real)
    if any(s <= 0 for s in ss):
        raise ConfigError("s: values must be positive")
    if any(not 0 < l < 0.5 for l in lams):
        raise ConfigError("lambda2: values must lie in (0, 1/2)")
    N = cfg.grid or 256
    tol = cfg.tol if cfg.tol is not None else DEFAULTS["tol"]
    workers = _positive_int("workers", p.get("workers", DEFAULTS["workers"]))
    with_dhym = _bool(p.get("dhym", False))
    jobs = sorted({(r1, r2, s, l, N, tol, with_dhym) for r1 in r1s for r2 in r2s for s in ss for l in lams})
    if workers == 1:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    rows.sort(key=lambda r: (r["r1"], r["r2"], as_rational(r["s"]), r["lambda2"]))
    out = _out_dir(cfg)
    if out is not None:
        write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
    return EXIT_OK, {"rows": rows}


RUNNERS = {
    "stability": run_stability,
    "vortex-window": run_vortex_window,
    "vortex-check": run_vortex_check,
    "vortex-solve": run_vortex_solve,
    "projective": run_projective,
    "dhym": run_dhym,
    "sweep": run_sweep,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    try:
        return RUNNERS[cfg.subcommand](cfg)
    except ConfigError as exc:
        return EXIT_CONFIG, {"error": "CONFIG", "message": str(exc)}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jflow", description="J-equation stability, vortex and dHYM tools")
    ap.add_argument("--config", help="JSON file with parameter values (explicit flags win)")
    ap.add_argument("--log-level", default="WARNING")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--out", dest="output_dir", default=None)
        if grid:
            p.add_argument("--grid", type=int, default=None)
            p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("stability", help="stability calculus on a lattice JSON document")
    p.add_argument("--input", default=None)
    common(p, grid=False)

    v = sub.add_parser("vortex", help="vortex-bundle tools")
    vsub = v.add_subparsers(dest="vortex_command", required=True)
    p = vsub.add_parser("window")
    p.add_argument("--r1", default=None)
    p.add_argument("--r2", default=None)
    common(p, grid=False)
    p = vsub.add_parser("check")
    p.add_argument("--r1", default=None)
    p.add_argument("--r2", default=None)
    p.add_argument("--s", default=None)
    common(p, grid=False)
    p = vsub.add_parser("solve")
    p.add_argument("--r1", default=None)
    p.add_argument("--r2", default=None)
    p.add_argument("--s", default=None)
    p.add_argument("--lambda2", default=None)
    p.add_argument("--allow-inadmissible", dest="allow_inadmissible", action="store_const", const=True, default=None)
    common(p)

    p = sub.add_parser("projective", help="exact checks on T'CP^n")
    p.add_argument("--n", default=None)
    common(p, grid=False)

    p = sub.add_parser("dhym", help="small-volume dHYM scaling of a solved vortex")
    p.add_argument("--from", dest="from_dir", default=None)
    p.add_argument("--eps", default=None)
    common(p, grid=False)

    p = sub.add_parser("sweep", help="solve a grid of vortex parameters")
    p.add_argument("--r1", default=None)
    p.add_argument("--r2", default=None)
    p.add_argument("--s", default=None)
    p.add_argument("--lambda2", default=None)
    p.add_argument("--workers", default=None)
    p.add_argument("--dhym", action="store_const", const=True, default=None)
    common(p)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    sub = ns.command if ns.command != "vortex" else f"vortex-{ns.vortex_command}"
    values = {}
    if ns.config:
        try:
            doc = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: expected a JSON object")
        if "subcommand" in doc:
            if doc["subcommand"] != sub:
                raise ConfigError(f"config: written for {doc['subcommand']!r}, not {sub!r}")
            doc = RunConfig.from_json(doc)
            values.update(doc.parameters)
            for key in COMMON_KEYS:
                if getattr(doc, key) is not None:
                    values[key] = getattr(doc, key)
        else:
            unknown = set(doc) - PARAM_KEYS[sub] - COMMON_KEYS
            if unknown:
                raise ConfigError(f"config: unknown keys for {sub}: {', '.join(sorted(unknown))}")
            values.update(doc)
    for key in PARAM_KEYS[sub] | COMMON_KEYS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    env_out = os.environ.get("JFLOW_OUT")
    if env_out:
        values["output_dir"] = env_out
    grid = values.pop("grid", None)
    tol = values.pop("tol", None)
    out = values.pop("output_dir", None)
    if grid is not None:
        grid = _positive_int("grid", grid)
    if tol is not None:
        tol = _real("tol", tol)
    return RunConfig(sub, values, out, grid, tol)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(ns.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, report = run(cfg)
    if code == EXIT_CONFIG:
        print(f"error: {report['message']}", file=sys.stderr)
        return code
    text = dumps(report if cfg.subcommand != "sweep" else {"rows": len(report["rows"]), "output_dir": cfg.output_dir})
    sys.stdout.write(text)
    if cfg.subcommand == "dhym":
        print(f"slope: {report.get('slope')}  slope_post_newton: {report.get('slope_post_newton')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
