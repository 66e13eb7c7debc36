"""Command-line entry point: config-driven verification runs.

Reports are split into a canonical, byte-reproducible ``report.json``
(identical config and version give identical bytes), per-suite CSV tables,
and a non-canonical ``timings.json``.  Exit codes: 0 all selected suites
pass, 1 suite failure, 2 configuration error, 3 numerical non-convergence.
"""

import argparse
import concurrent.futures
import csv
import importlib.resources
import json
import pathlib
import sys

import numpy as np

from . import __version__
from .config import DEFAULT_SEED, load_config
from .errors import ConfigError, ConvergenceError, WedgeQFTError
from .suites import SUITE_FUNCTIONS, SUITE_NAMES, suites_for_all

_SUITE_INDEX = {name: i for i, name in enumerate(SUITE_NAMES)}

_CSV_SCHEMA = {
    "verify-scattering": {
        "relation": "identity being sampled",
        "residual": "max residual over 201 points in [-8, 8]"},
    "verify-algebra": {
        "check": "algebraic law or operator identity",
        "residual": "relative residual on random inputs"},
    "verify-locality": {
        "n": "spectator count",
        "thetas": "space-separated spectator rapidities",
        "abs_b": "|B| line integral",
        "abs_c": "|C| line integral",
        "abs_sum": "|B + C|",
        "relative": "|B + C| / max(|B|, |C|, floor)"},
    "smatrix": {
        "trial": "trial index", "n": "particle number",
        "multiplier_residual": "wave-operator product vs two-body factor",
        "overlap_residual": "<in, out> vs multiplier oracle"},
    "nuclearity-curve": {
        "s": "splitting distance", "sigma": "Hardy constant",
        "trace_norm": "||T_s||_1 estimate",
        "trace_rel_change": "relative change at last refinement",
        "bound_distal": "geometric series bound (inf above radius)",
        "log_bound_minus": "log of the Pauli-improved series (fermionic)"},
    "find-smin": {"kappa": "strip parameter", "s_min": "root of sigma*||T||=1"},
    "free-bose": {
        "s": "splitting distance", "value": "determinant surrogate",
        "max_singular_phi": "largest singular value, position kernel",
        "max_singular_pi": "largest singular value, momentum kernel",
        "trace_phi": "trace norm, position kernel",
        "trace_pi": "trace norm, momentum kernel"},
    "ising-fermi": {
        "s": "splitting distance",
        "exp_bound": "exponential trace-norm bound",
        "det_bound": "determinant bound from the same spectrum"},
    "partition": {
        "beta": "inverse temperature", "inv_beta": "1/beta",
        "mu": "modular weight arctan(beta/2r)/2pi",
        "s_effective": "r sin(2 pi mu)",
        "log_bound": "log of the partition bound",
        "bound": "partition bound (inf when above double range)",
        "heuristic": "always true: kernel extrapolation is heuristic"},
}


def resolve_config_path(arg):
    """A plain path, or ``catalogue:NAME`` for a shipped model config."""
    if arg.startswith("catalogue:"):
        name = arg.split(":", 1)[1]
        ref = importlib.resources.files("wedgeqft") / "catalogue" / f"{name}.cfg"
        if not ref.is_file():
            raise ConfigError(f"no catalogue config named {name!r}")
        return str(ref)
    return arg


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def run_suites(cfg, names, seed, parallel=False):
    """Execute suites with per-suite deterministic generators."""
    def rng_for(name):
        return np.random.default_rng([seed, _SUITE_INDEX[name]])

    results = {}
    if parallel and len(names) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=4) as pool:
            futures = {name: pool.submit(SUITE_FUNCTIONS[name], cfg, rng_for(name))
                       for name in names}
            for name in names:
                results[name] = futures[name].result()
    else:
        for name in names:
            results[name] = SUITE_FUNCTIONS[name](cfg, rng_for(name))
    return results


def assemble_report(cfg, results, seed):
    return {
        "tool": "wedgeqft",
        "version": __version__,
        "seed": seed,
        "config_path": str(cfg.path),
        "config": cfg.echo,
        "model": cfg.model_name,
        "suites": {name: res.report_entry() for name, res in results.items()},
        "all_passed": all(res.passed for res in results.values()),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="wedgeqft",
        description="Verify factorizing-S-matrix model identities and bounds")
    parser.add_argument("suite", choices=SUITE_NAMES + ("all",),
                        help="verification suite to run")
    parser.add_argument("--config", required=False,
                        help="config path or catalogue:NAME")
    parser.add_argument("--out", default="wedgeqft-out",
                        help="output directory for report and CSV files")
    parser.add_argument("--format", choices=("json", "csv"), default=None,
                        help="override the output format from the config")
    parser.add_argument("--tol-override", action="append", default=[],
                        metavar="SECTION.KEY=VAL",
                        help="override any config entry (repeatable)")
    parser.add_argument("--s-min", type=float, default=None,
                        help="lower end of the splitting-distance curve")
    parser.add_argument("--s-max", type=float, default=None,
                        help="upper end of the splitting-distance curve")
    parser.add_argument("--steps", type=int, default=None,
                        help="number of samples on the s or beta curve")
    parser.add_argument("--beta", type=float, default=None,
                        help="single inverse temperature for the partition suite")
    parser.add_argument("--r", type=float, default=None,
                        help="localization radius for the partition suite")
    parser.add_argument("--seed", type=lambda v: int(v, 0), default=None,
                        help="seed for randomized trials (recorded in report)")
    parser.add_argument("--parallel", action="store_true",
                        help="run independent suites concurrently")
    parser.add_argument("--schema", action="store_true",
                        help="print the CSV column documentation and exit")
    args = parser.parse_args(argv)

    if args.schema:
        print(json.dumps(_CSV_SCHEMA, sort_keys=True, indent=2))
        return 0

    if args.config is None:
        _fail_json({"kind": "config", "message": "--config is required"})
        return 2
    overrides = list(args.tol_override)
    if args.s_min is not None:
        overrides.append(f"nuclearity.s_min={args.s_min}")
    if args.s_max is not None:
        overrides.append(f"nuclearity.s_max={args.s_max}")
    if args.steps is not None:
        overrides.append(f"nuclearity.steps={args.steps}")
        overrides.append(f"partition.steps={args.steps}")
    if args.beta is not None:
        overrides.append(f"partition.beta_min={args.beta}")
        overrides.append(f"partition.beta_max={args.beta}")
        overrides.append("partition.steps=1")
    if args.r is not None:
        overrides.append(f"partition.r={args.r}")
    try:
        path = resolve_config_path(args.config)
        cfg = load_config(path, overrides=overrides)
    except ConfigError as exc:
        _fail_json({"kind": "config", "message": str(exc),
                    "path": getattr(exc, "path", None),
                    "line": getattr(exc, "line", None)})
        return 2

    seed = DEFAULT_SEED if args.seed is None else args.seed
    names = suites_for_all(cfg) if args.suite == "all" else [args.suite]
    out_format = args.format or cfg.out_format

    try:
        results = run_suites(cfg, names, seed, parallel=args.parallel)
    except ConvergenceError as exc:
        _fail_json({"kind": "nonconvergence", "message": str(exc)})
        return 3
    except WedgeQFTError as exc:
        _fail_json({"kind": "suite-error", "message": str(exc)})
        return 1

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = assemble_report(cfg, results, seed)
    (out_dir / "report.json").write_text(_canonical_json(report),
                                         encoding="utf-8")
    nuc_report = _nuclearity_report(cfg, results)
    if nuc_report is not None:
        (out_dir / "nuclearity-report.json").write_text(
            _canonical_json(nuc_report), encoding="utf-8")
    timings = {name: res.runtime for name, res in results.items()}
    (out_dir / "timings.json").write_text(
        json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if out_format == "csv":
        for name, res in results.items():
            if res.rows:
                write_csv(out_dir / f"{name}.csv", res.columns, res.rows)

    for name, res in results.items():
        status = "PASS" if res.passed else "FAIL"
        if res.nonconverged:
            status += " (non-converged)"
        print(f"[{status}] {name}: {json.dumps(res.summary, sort_keys=True, default=str)}")

    if not all(res.passed for res in results.values()):
        return 1
    if any(res.nonconverged for res in results.values()):
        return 3
    return 0


def _nuclearity_report(cfg, results):
    """Assemble the bound-curve report when the relevant suites ran."""
    from .nuclearity import NuclearityReport

    sources = [n for n in ("nuclearity-curve", "find-smin", "free-bose",
                           "ising-fermi", "partition") if n in results]
    if not sources:
        return None
    nan = float("nan")
    rows = []
    kappa, sup, s_min = nan, nan, nan
    extras = {}
    for name in sources:
        res = results[name]
        if name == "nuclearity-curve":
            rows = [dict(r) for r in res.rows]
            kappa = res.summary.get("kappa", nan)
            sup = res.summary.get("sup_norm", nan)
        elif name == "find-smin":
            s_min = res.summary.get("s_min", nan)
        else:
            extras[name.replace("-", "_")] = [dict(r) for r in res.rows]
    rep = NuclearityReport(model=cfg.model_name, kappa=kappa, sup_norm=sup,
                           rows=tuple(rows), s_min=s_min, extras=extras)
    out = rep.as_dict()
    out["runtimes"] = "see timings.json (kept out of canonical reports)"
    return out


def _fail_json(payload):
    print(json.dumps({"error": payload}, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
