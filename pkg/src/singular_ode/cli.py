"""Command-line interface: single runs, classification, rate fits, fast-solution
construction, region checks and parallel parameter sweeps.

Exit codes: 0 success, 1 usage, 2 validation failure, 3 numerical failure,
4 file I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .analysis import classify_empirical, energy_audit, fit_decay_exponent
from .constructor import build_fast_solution, equation_residual
from .errors import InsufficientDataError, NumericalError, ValidationError
from .integrator import CSV_HEADER, DEFAULT_TOL, Status, integrate
from .model import Params, Regime, alpha_star, classify_theoretical, critical_c0
from .regions import RegionSpec, region_certificate, region_invariance_test

__all__ = ["DEFAULTS", "SweepGrid", "RunReport", "run_case", "run_sweep", "write_report", "write_reports", "main"]

DEFAULTS = {"tol": DEFAULT_TOL, "t_end": 200.0, "T_max": 1e4}

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- reports


def _fmt(x) -> str:
    """Scalar as CSV cell: floats with 17 significant digits, ``None`` empty."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats written to 17 significant digits (non-finite as null)."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class RunReport:
    """Summary of one integration: regimes, fitted exponents, audit and zero counts.

    Exponents are fitted on ``[t_end/4, t_end]`` and left ``None`` when the
    fit precondition (at least 8 positive samples) fails.
    """

    l: float
    alpha: float
    beta: float
    c: float
    d: float
    u0: float
    du0: float
    t_end: float
    tol: float
    regime_theoretical: str
    regime_empirical: str
    exponent_E: float | None = None
    exponent_u: float | None = None
    exponent_du: float | None = None
    max_energy_increase: float | None = None
    dissipation_residual: float | None = None
    tail_statistic: float | None = None
    n_u_zeros: int = 0
    n_du_zeros: int = 0
    status: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def _fit_or_none(t, v, window):
    try:
        return fit_decay_exponent((t, np.abs(v)), window).exponent
    except (InsufficientDataError, ValidationError):
        return None


def run_case(params: Params, u0: float, du0: float, t_end: float = DEFAULTS["t_end"], tol: float = DEFAULTS["tol"]) -> RunReport:
    """Integrate one case and collect a :class:`RunReport`.

    Parameter sets outside the uniqueness regime are reported without
    integration (status ``NotWellPosed``). A run too short to classify is
    reported as ``OutsideTheory`` empirically.
    """
    base = dict(params.as_dict(), u0=float(u0), du0=float(du0), t_end=float(t_end), tol=float(tol))
    theo = str(classify_theoretical(params))
    if not params.well_posed:
        return RunReport(**base, regime_theoretical=theo, regime_empirical=str(Regime.OUTSIDE), status="NotWellPosed")
    traj = integrate(params, u0, du0, t_end, tol)
    try:
        emp = str(classify_empirical(params, traj))
    except InsufficientDataError:
        emp = str(Regime.OUTSIDE)
    audit = energy_audit(params, traj)
    window = (t_end / 4.0, t_end)
    return RunReport(
        **base,
        regime_theoretical=theo,
        regime_empirical=emp,
        exponent_E=_fit_or_none(traj.t, traj.E, window),
        exponent_u=_fit_or_none(traj.t, traj.u, window),
        exponent_du=_fit_or_none(traj.t, traj.du, window),
        max_energy_increase=audit.max_energy_increase,
        dissipation_residual=audit.dissipation_residual,
        tail_statistic=audit.tail_liminf_statistic,
        n_u_zeros=len(traj.u_zeros),
        n_du_zeros=len(traj.du_zeros),
        status=str(traj.status),
    )


def write_reports(reports, fmt: str, sink) -> None:
    """Serialize run reports as CSV (one row each, header always) or a JSON list."""
    if isinstance(sink, (str, os.PathLike)):
        try:
            with open(sink, "w", newline="") as fh:
                write_reports(reports, fmt, fh)
        except OSError as exc:
            raise OSError(f"cannot write {os.fspath(sink)}: {exc.strerror}") from exc
        return
    fmt = fmt.upper()
    if fmt == "CSV":
        w = csv.writer(sink, lineterminator="\n")
        cols = RunReport.columns()
        w.writerow(cols)
        for r in reports:
            d = r.as_dict()
            w.writerow([_fmt(d[c]) for c in cols])
    elif fmt == "JSON":
        sink.write(dumps([dict(r.as_dict(), defaults=DEFAULTS) for r in reports]) + "\n")
    else:
        raise ValidationError(f"unknown report format {fmt!r}")


def write_report(report: RunReport, fmt: str, sink) -> None:
    """Serialize a single report; JSON output is one object."""
    if fmt.upper() == "JSON":
        text = dumps(dict(report.as_dict(), defaults=DEFAULTS)) + "\n"
        _write_text(text, sink)
    else:
        write_reports([report], fmt, sink)


def _write_text(text: str, sink) -> None:
    if sink is None:
        sys.stdout.write(text)
    elif isinstance(sink, (str, os.PathLike)):
        try:
            with open(sink, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {os.fspath(sink)}: {exc.strerror}") from exc
    else:
        sink.write(text)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid of parameters and initial conditions."""

    l: tuple
    alpha: tuple
    beta: tuple
    c: tuple
    d: tuple
    ics: tuple
    t_end: float = DEFAULTS["t_end"]
    tol: float = DEFAULTS["tol"]

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepGrid":
        if not isinstance(raw, dict):
            raise ValidationError("grid must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown grid keys: {sorted(unknown)}")
        missing = {"l", "alpha", "beta", "c", "d", "ics"} - set(raw)
        if missing:
            raise ValidationError(f"missing grid keys: {sorted(missing)}")
        vals = {}
        for name in ("l", "alpha", "beta", "c", "d"):
            seq = raw[name]
            if not isinstance(seq, list):
                raise ValidationError(f"grid key {name!r} must be a list of numbers")
            vals[name] = tuple(float(x) for x in seq)
        ics = []
        for ic in raw["ics"]:
            if not (isinstance(ic, list) and len(ic) == 2):
                raise ValidationError(f"each initial condition must be [u0, du0], got {ic!r}")
            ics.append((float(ic[0]), float(ic[1])))
        t_end = float(raw.get("t_end", DEFAULTS["t_end"]))
        tol = float(raw.get("tol", DEFAULTS["tol"]))
        if not (t_end > 0 and tol > 0):
            raise ValidationError("t_end and tol must be > 0")
        return cls(**vals, ics=tuple(ics), t_end=t_end, tol=tol)

    def entries(self):
        """Grid points in lexicographic order of ``(l, alpha, beta, c, d, ic)``."""
        for l, a, b, c, d, ic in itertools.product(self.l, self.alpha, self.beta, self.c, self.d, self.ics):
            yield Params(l, a, b, c, d), ic

    def __len__(self) -> int:
        return len(self.l) * len(self.alpha) * len(self.beta) * len(self.c) * len(self.d) * len(self.ics)


def _run_entry(args):
    params, (u0, du0), t_end, tol = args
    return run_case(params, u0, du0, t_end, tol)


def run_sweep(grid: SweepGrid, jobs: int = 1) -> list[RunReport]:
    """Run every grid entry; results come back in grid order whatever ``jobs`` is."""
    tasks = [(p, ic, grid.t_end, grid.tol) for p, ic in grid.entries()]
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_entry(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_entry, tasks))


# ---------------------------------------------------------------- commands


def _params(ns) -> Params:
    return Params(ns.l, ns.alpha, ns.beta, ns.c, ns.d)


def _cmd_simulate(ns) -> int:
    p = _params(ns)
    traj = integrate(p, ns.u0, ns.du0, ns.t_end, ns.tol)
    text = traj.csv_text()
    _write_text(text, ns.out)
    if traj.status == Status.STEP_FAILURE:
        raise NumericalError(f"step size underflow at t = {traj.t_end}; partial trajectory written")
    return EXIT_OK


def _cmd_classify(ns) -> int:
    p = _params(ns)
    if ns.empirical:
        report = run_case(p, ns.u0, ns.du0, ns.t_end, ns.tol)
        write_report(report, "JSON", ns.json)
        return EXIT_OK
    out = dict(p.as_dict())
    out["regime_theoretical"] = str(classify_theoretical(p))
    out["alpha_star"] = alpha_star(p)
    out["c0"] = critical_c0(p)
    out["defaults"] = DEFAULTS
    _write_text(dumps(out) + "\n", ns.json)
    return EXIT_OK


def _read_series(path, column):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader, ()))
            if header != CSV_HEADER:
                raise ValidationError(f"{path}: header must be {','.join(CSV_HEADER)}")
            rows = np.array([[float(x) for x in r] for r in reader if r], dtype=float).reshape(-1, len(CSV_HEADER))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: malformed number ({exc})") from exc
    return rows[:, 0], np.abs(rows[:, CSV_HEADER.index(column)])


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--window must be LO,HI, got {text!r}") from exc
    return lo, hi


def _cmd_rate(ns) -> int:
    window = _parse_window(ns.window)
    t, v = _read_series(ns.traj, ns.series)
    est = fit_decay_exponent((t, v), window)
    out = dict(est.as_dict(), series=ns.series, conclusive=est.conclusive, defaults=DEFAULTS)
    _write_text(dumps(out) + "\n", ns.json)
    return EXIT_OK


def _auto_or_float(text: str):
    if text.upper() == "AUTO":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"expected a number or AUTO, got {text!r}") from exc


def _cmd_construct_fast(ns) -> int:
    p = Params(ns.l, ns.alpha, ns.beta, 1.0, 1.0)
    sol = build_fast_solution(p, _auto_or_float(ns.phi), _auto_or_float(ns.eps_fp), ns.tmax, n_nodes=ns.nodes)
    summary = dict(p.as_dict(), **sol.summary(), equation_residual=equation_residual(p, sol), defaults=DEFAULTS)
    if ns.out_prefix:
        prefix = ns.out_prefix
        try:
            sol.v.to_csv(f"{prefix}_v.csv")
            sol.u.to_csv(f"{prefix}_u.csv")
            sol.du.to_csv(f"{prefix}_du.csv")
        except OSError as exc:
            raise OSError(f"cannot write {prefix}_*.csv: {exc.strerror}") from exc
        _write_text(dumps(summary) + "\n", f"{prefix}_summary.json")
    else:
        _write_text(dumps(summary) + "\n", None)
    return EXIT_OK


def _cmd_region_check(ns) -> int:
    p = _params(ns)
    spec = RegionSpec(ns.eps_r, ns.M)
    out = dict(p.as_dict(), certificate=region_certificate(p, spec, ns.n_samples).as_dict())
    if ns.invariance:
        out["invariance"] = region_invariance_test(p, spec, ns.n_ics, ns.t_end, ns.tol, seed=ns.seed).as_dict()
    out["defaults"] = DEFAULTS
    _write_text(dumps(out) + "\n", ns.json)
    return EXIT_OK


def _cmd_sweep(ns) -> int:
    try:
        with open(ns.grid) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {ns.grid}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{ns.grid}: invalid JSON ({exc.msg})") from exc
    grid = SweepGrid.from_dict(raw)
    if ns.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    reports = run_sweep(grid, ns.jobs)
    if ns.out:
        write_reports(reports, "CSV", ns.out)
    else:
        buf = io.StringIO()
        write_reports(reports, "CSV", buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_params(sp, with_cd: bool = True) -> None:
    sp.add_argument("--l", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    if with_cd:
        sp.add_argument("--c", type=float, required=True)
        sp.add_argument("--d", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="singular-ode", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("simulate", help="integrate one trajectory and write t,u,du,p,E")
    _add_params(sp)
    sp.add_argument("--u0", type=float, required=True)
    sp.add_argument("--du0", type=float, required=True)
    sp.add_argument("--t-end", type=float, default=DEFAULTS["t_end"])
    sp.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    sp.add_argument("--out", help="CSV file (default: stdout)")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("classify", help="predicted (and optionally observed) oscillation class")
    _add_params(sp)
    sp.add_argument("--empirical", action="store_true")
    sp.add_argument("--u0", type=float, default=1.0)
    sp.add_argument("--du0", type=float, default=0.0)
    sp.add_argument("--t-end", type=float, default=DEFAULTS["t_end"])
    sp.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    sp.add_argument("--json", help="output file (default: stdout)")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("rate", help="fit a power law to a trajectory column")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--series", choices=("E", "u", "du"), required=True)
    sp.add_argument("--window", required=True, help="LO,HI")
    sp.add_argument("--json")
    sp.set_defaults(func=_cmd_rate)

    sp = sub.add_parser("construct-fast", help="fixed-point construction of a fast solution (c = d = 1)")
    _add_params(sp, with_cd=False)
    sp.add_argument("--phi", default="AUTO")
    sp.add_argument("--tmax", type=float, default=DEFAULTS["T_max"])
    sp.add_argument("--eps-fp", default="AUTO")
    sp.add_argument("--nodes", type=int, default=2000)
    sp.add_argument("--out-prefix")
    sp.set_defaults(func=_cmd_construct_fast)

    sp = sub.add_parser("region-check", help="certify the slow-solution sector")
    _add_params(sp)
    sp.add_argument("--M", type=float, required=True)
    sp.add_argument("--eps-r", type=float, required=True)
    sp.add_argument("--n-samples", type=int, default=1000)
    sp.add_argument("--invariance", action="store_true")
    sp.add_argument("--n-ics", type=int, default=50)
    sp.add_argument("--t-end", type=float, default=DEFAULTS["t_end"])
    sp.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json")
    sp.set_defaults(func=_cmd_region_check)

    sp = sub.add_parser("sweep", help="run a JSON parameter grid, write one CSV row per entry")
    sp.add_argument("--grid", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_sweep)
    return ap


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        return ns.func(ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
