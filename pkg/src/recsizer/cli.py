"""``rec-sizer`` command line: extract, size, evaluate, report.

Exit codes: 0 success, 2 schema or input errors, 3 insufficient data,
4 infeasible model, 5 limits hit before the gap was proven.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import extraction as ex
from . import io as rio
from . import report as rep
from .core import ConfigError, DomainError, validate_config
from .lp import StructureError
from .sizing import (INFEASIBLE, NOT_PROVEN, OracleLimitExceeded, assemble,
                     brute_force_oracle, check_solution, load_solution, solve_bnb)
from .sizing.solution import to_json_dict

log = logging.getLogger("recsizer")

EXIT_SCHEMA = 2
EXIT_INSUFFICIENT = 3
EXIT_INFEASIBLE = 4
EXIT_LIMITS = 5


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    command: str
    config_hash: str = None
    input_hashes: dict = field(default_factory=dict)
    version: str = __version__
    started: str = None
    finished: str = None
    solver_stats: dict = None


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _manifest(command, inputs, config_hash=None):
    hashes = {str(p): rio.file_hash(p) for p in inputs if p is not None and Path(p).is_file()}
    return RunManifest(command, config_hash, hashes, started=_now())


def _write_json(path, obj):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)


def _load_config(path):
    try:
        cfg = rio.load_config(path, load_series=False)
        return validate_config(cfg)
    except ConfigError as exc:
        lines = "\n".join(f"  {v.code} at {v.where}: {v.message}" for v in exc.violations)
        raise CommandError(EXIT_SCHEMA, f"{path}: invalid config\n{lines}") from None


# ---------------------------------------------------------------------------
# extract


def _parse_input(spec):
    pid, sep, path = spec.partition("=")
    if not sep:
        path = spec
        pid = Path(spec).stem
    return pid, Path(path)


def _parse_lambda(text):
    if text in ("auto", "cv"):
        return text
    try:
        v = float(text)
    except ValueError:
        raise CommandError(EXIT_SCHEMA, f"--lambda: expected auto, cv or a number, got {text!r}") from None
    if v < 0:
        raise CommandError(EXIT_SCHEMA, "--lambda must be nonnegative")
    return v


def cmd_extract(args):
    lam = _parse_lambda(args.lam)
    spec = ex.RegressorSpec(n_yearly=args.ny, n_weekly=args.nw, n_daily=args.nd)
    try:
        weather = rio.read_weather_csv(args.weather)
    except rio.SchemaError as exc:
        raise CommandError(EXIT_SCHEMA, f"--weather: {exc}") from None
    inputs = [_parse_input(s) for s in args.input]
    ids = [pid for pid, _ in inputs]
    if len(set(ids)) != len(ids):
        raise CommandError(EXIT_SCHEMA, f"--input: duplicate participant ids {ids}")
    man = _manifest("extract", [p for _, p in inputs] + [Path(args.weather)])
    wdays = ex.weather_rep_days(weather)
    dates = wdays[0].dates
    loads, models = {}, {}
    for pid, path in inputs:
        try:
            series = rio.read_series_csv(path)
        except rio.SchemaError as exc:
            raise CommandError(EXIT_SCHEMA, f"--input {pid}: {exc}") from None
        model = ex.fit_seasonal(series, spec, lam=lam)
        if not model.converged:
            log.warning("participant %s: FISTA stopped before tolerance", pid)
        log.info("participant %s: lambda=%.6g nonzeros=%d", pid, model.lam, int((model.theta != 0).sum()))
        loads[pid] = ex.representative_days(model, dates)
        models[pid] = {"lambda": model.lam, "converged": model.converged,
                       "nonzeros": int((model.theta != 0).sum()),
                       "regressors": {"n_yearly": spec.n_yearly, "n_weekly": spec.n_weekly,
                                      "n_daily": spec.n_daily}}
    out = rio.repdays_to_dict(loads, wdays, models=models)
    man.finished = _now()
    out["manifest"] = asdict(man)
    _write_json(args.output, out)
    print(f"wrote {args.output}: {len(loads)} participants x 4 representative days")
    return 0


# ---------------------------------------------------------------------------
# size


def _load_repdays(path):
    return rio.repdays_from_dict(rio.load_json(path))


def cmd_size(args):
    cfg = _load_config(args.config)
    loads, weather, hod = _load_repdays(args.repdays)
    chash = rio.config_hash(cfg)
    man = _manifest("size", [Path(args.config), Path(args.repdays)], chash)
    try:
        problem = assemble(cfg, loads, weather, hod)
    except StructureError as exc:
        raise CommandError(EXIT_SCHEMA, f"{args.repdays}: {exc}") from None
    if args.method == "oracle":
        try:
            sol = brute_force_oracle(problem)
        except OracleLimitExceeded as exc:
            raise CommandError(EXIT_SCHEMA, f"--method oracle: instance too large ({exc})") from None
    else:
        sol = solve_bnb(problem, gap_tol=args.gap, time_limit=args.time_limit, threads=args.threads)
    sol.config_hash = chash
    man.finished = _now()
    man.solver_stats = asdict(sol.stats)
    out = to_json_dict(sol, problem)
    out["manifest"] = asdict(man)
    _write_json(args.out, out)

    print(f"{'participant':<14}{'N_pv':>6}{'N_bess':>8}")
    for pid, a, b in zip(sol.ids, sol.n_pv, sol.n_bess):
        print(f"{pid:<14}{a:>6d}{b:>8d}")
    print(f"status: {sol.status}")
    print(f"net profit: {sol.objective:.2f} EUR")
    print(f"bound: {sol.stats.bound:.2f} EUR")
    print(f"gap: {sol.stats.gap:.3e}")
    print(f"nodes: {sol.stats.nodes}  time: {sol.stats.wall_time_s:.2f} s")

    if sol.status == INFEASIBLE:
        raise CommandError(EXIT_INFEASIBLE, "sizing problem is infeasible")
    bad = check_solution(problem, sol)
    if bad:
        log.error("solution fails %d constraint checks, first: %s", len(bad), bad[0])
    if sol.status == NOT_PROVEN:
        raise CommandError(EXIT_LIMITS, f"limits hit at gap {sol.stats.gap:.3e}; incumbent written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args):
    cfg = _load_config(args.config)
    try:
        sol = load_solution(args.solution)
    except OSError as exc:
        raise CommandError(EXIT_SCHEMA, f"{args.solution}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CommandError(EXIT_SCHEMA, f"{args.solution}: malformed solution ({exc})") from None
    chash = rio.config_hash(cfg)
    if sol.config_hash != chash:
        raise CommandError(EXIT_SCHEMA, f"{args.solution} was produced from a different config "
                                        f"(hash {sol.config_hash} != {chash})")
    if sol.dispatch is None:
        raise CommandError(EXIT_INFEASIBLE, f"{args.solution} holds no feasible dispatch")
    man = _manifest("evaluate", [Path(args.config), Path(args.solution)], chash)
    try:
        report = rep.evaluate(cfg, sol)
    except rep.ReportError as exc:
        raise CommandError(EXIT_SCHEMA, str(exc)) from None
    man.finished = _now()
    report["manifest"] = asdict(man)
    _write_json(args.out, report)

    print(f"{'participant':<14}{'zeta':>8}{'payback':>9}{'bill before':>14}{'bill after':>14}{'NPV end':>14}")
    for p in report["participants"]:
        pb = "-" if p["payback_years"] is None else str(p["payback_years"])
        print(f"{p['id']:<14}{p['zeta']:>8.4f}{pb:>9}{p['bill_before_eur']:>14.2f}"
              f"{p['bill_after_eur']:>14.2f}{p['npv_by_year_eur'][-1]:>14.2f}")
    com = report["community"]
    print(f"community net profit: {com['net_profit_eur']:.2f} EUR")
    print(f"shared energy over the representative days: {sum(com['shared_energy_by_hour_kwh']):.3f} kWh")
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(args):
    try:
        report = rep.load_report(args.inp)
    except rep.ReportError as exc:
        raise CommandError(EXIT_SCHEMA, str(exc)) from None
    man = _manifest("report", [Path(args.inp)], report.get("config_hash"))
    written = rep.write_plots(report, args.outdir, args.format)
    man.finished = _now()
    man_dict = asdict(man)
    man_dict["outputs"] = {p.name: rio.file_hash(p) for p in written}
    _write_json(Path(args.outdir) / "manifest.json", man_dict)
    for p in written:
        print(p)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="rec-sizer", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="fit load models and write representative days")
    p.add_argument("--input", action="append", required=True, metavar="[ID=]LOAD.csv",
                   help="hourly load CSV (timestamp,value); repeat per participant")
    p.add_argument("--weather", required=True, metavar="WEATHER.csv",
                   help="hourly weather CSV (timestamp,irradiance,ambient)")
    p.add_argument("--output", required=True)
    p.add_argument("--lambda", dest="lam", default="auto", help="auto, cv or a number")
    p.add_argument("--ny", type=int, default=2, help="yearly harmonics")
    p.add_argument("--nw", type=int, default=3, help="weekly harmonics")
    p.add_argument("--nd", type=int, default=4, help="daily harmonics")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("size", help="solve the sizing problem")
    p.add_argument("--config", required=True)
    p.add_argument("--repdays", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("bnb", "oracle"), default="bnb")
    p.add_argument("--gap", type=float, default=1e-6)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("evaluate", help="economic report for a solution")
    p.add_argument("--config", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="write plots and their CSV twins")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--format", choices=("svg", "csv"), default="svg")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    level = os.environ.get("REC_SIZER_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"rec-sizer {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except ex.InsufficientData as exc:
        print(f"rec-sizer {args.command}: insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (rio.SchemaError, DomainError, StructureError) as exc:
        print(f"rec-sizer {args.command}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
