"""Command-line front end: ``rankfn <subcommand> [flags]``.

Every subcommand writes its outputs plus ``run.json`` into ``--out``.
Flag defaults may come from a ``key = value`` config file given by
``--config``; explicit flags win. Exit codes: 0 success, 1 usage,
2 input parse error, 3 failed precondition, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io
from .complexes import FiltrationError, bifiltration_grid, distance_matrix, sublevel_filtration, vietoris_rips
from .datasets import circles_and_discs_dataset, rank_dataset
from .learn import KernelSpec, Pipeline, cross_validate
from .metrics import bottleneck, landscape_distance, lp_distance, wasserstein
from .persistence import barcode_to_diagram, compute_persistence, persistence_diagram
from .rank import RankGrid, grid_for, landscape, rank_from_diagram, rank_invariant, truncate
from .stability import counterexample_sweep, truncated_suite, wasserstein_suite

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3, 4

# flags that describe where to run rather than what to compute
_ENVIRONMENT_KEYS = {"config", "out", "threads"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """Subcommand plus every option value, in a canonical text form."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def canonical(self) -> str:
        lines = [f"subcommand = {self.subcommand}"]
        lines += [f"{k} = {json.dumps(v)}" for k, v in sorted(self.options.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        raw = parse_config_text(text)
        sub = raw.pop("subcommand", None)
        if sub is None:
            raise UsageError("config has no subcommand")
        return cls(sub, {k: _json_or_text(v) for k, v in raw.items()})

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.options}


def _json_or_text(v: str):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def parse_config_text(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use ``_`` or ``-``."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise UsageError(f"config line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file supplying flag defaults")
    p.add_argument("--out", default="out", help="output directory (created if missing)")
    p.add_argument("--seed", type=int, default=0, help="root seed for every random choice")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap; defaults to $RANKFN_THREADS or 1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankfn", description="Rank functions of persistent homology.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("rips", help="Vietoris-Rips filtration and diagram of a point cloud")
    p.add_argument("--input", required=True, help="point cloud CSV")
    p.add_argument("--max-dim", type=int, default=2, help="largest simplex dimension")
    p.add_argument("--max-scale", type=float, default=float("inf"), help="largest edge length")
    p.add_argument("--dump-filtration", action="store_true", help="also write filtration.csv")
    _common(p)

    p = sub.add_parser("sublevel", help="lower-star filtration and diagram of a time series")
    p.add_argument("--input", required=True, help="single-column CSV")
    p.add_argument("--dump-filtration", action="store_true", help="also write filtration.csv")
    _common(p)

    p = sub.add_parser("bifiltration", help="rank invariant of a degree-Rips or height-Rips grid")
    p.add_argument("--input", required=True, help="point cloud CSV")
    p.add_argument("--kind", choices=("degree-rips", "height-rips"), default="degree-rips")
    p.add_argument("--axis1", required=True, help="comma-separated ascending scales")
    p.add_argument("--axis2", required=True, help="comma-separated ascending degrees or heights")
    p.add_argument("--degree", type=int, default=0, help="homology degree")
    p.add_argument("--max-dim", type=int, default=2, help="largest simplex dimension")
    _common(p)

    p = sub.add_parser("diagram", help="persistence diagram of a filtration dump")
    p.add_argument("--input", required=True, help="filtration CSV")
    p.add_argument("--max-degree", type=int, default=None, help="highest homology degree")
    p.add_argument("--method", choices=("cohomology", "homology"), default="cohomology",
                   help="reduction strategy; both give the same diagram")
    _common(p)

    p = sub.add_parser("rank", help="rank function grid of a diagram")
    p.add_argument("--input", required=True, help="diagram CSV")
    p.add_argument("--degree", type=int, default=0, help="homology degree")
    p.add_argument("--G", type=int, default=100, help="grid resolution")
    p.add_argument("--t-min", type=float, default=None, help="grid start; default min(0, births)")
    p.add_argument("--t-max", type=float, default=None, help="grid end; default the diagram cap")
    p.add_argument("--delta", type=float, default=None, help="truncation width")
    _common(p)

    p = sub.add_parser("distance", help="distance between two diagrams or two rank grids")
    p.add_argument("--input", required=True, help="first diagram CSV or rank JSON")
    p.add_argument("--input2", required=True, help="second diagram CSV or rank JSON")
    p.add_argument("--metric", choices=("bottleneck", "wasserstein", "lp", "landscape"),
                   default="bottleneck")
    p.add_argument("--p", type=float, default=1.0, help="exponent")
    p.add_argument("--degree", type=int, default=0, help="homology degree")
    p.add_argument("--G", type=int, default=100, help="grid resolution for lp on diagrams")
    p.add_argument("--k-max", type=int, default=5, help="landscape levels")
    p.add_argument("--certificate", action="store_true", help="include the optimal matching")
    _common(p)

    p = sub.add_parser("stability-check", help="empirical check of a stability bound")
    p.add_argument("--prop", type=int, choices=(10, 12, 14), required=True,
                   help="10 truncated bound, 12 Wasserstein bound, 14 counterexample sweep")
    p.add_argument("--p", type=float, default=None, help="exponent; default 2 for prop 14, else 1")
    p.add_argument("--delta", type=str, default="0.25,0.5,1", help="truncation widths (prop 10)")
    p.add_argument("--trials", type=int, default=200, help="random pairs")
    p.add_argument("--constant", choices=("proof", "remark"), default="proof",
                   help="constant used for the Wasserstein bound")
    p.add_argument("--b", type=float, default=0.0, help="bar birth (prop 14)")
    p.add_argument("--d", type=float, default=1.0, help="bar death (prop 14)")
    p.add_argument("--eps", type=str, default=None, help="comma-separated sweep values (prop 14)")
    p.add_argument("--G", type=int, default=200, help="quadrature resolution (prop 14)")
    _common(p)

    p = sub.add_parser("classify", help="cross-validated classification of rank functions")
    p.add_argument("--input", default=None,
                   help="manifest CSV of diagram_path,label; default the synthetic circles/discs set")
    p.add_argument("--hrv-dir", default=None,
                   help="directory of RR-interval CSVs with labels.csv (file,label)")
    p.add_argument("--pipeline", choices=("svm", "knn", "mbd"), default="svm")
    p.add_argument("--kernel", choices=("linear", "polynomial", "grbf"), default="polynomial")
    p.add_argument("--degree", type=int, default=2, help="polynomial kernel degree")
    p.add_argument("--gamma", type=float, default=None, help="grbf width; default 1/(D var)")
    p.add_argument("--C", type=str, default="1", help="soft-margin C; a comma list runs a grid search")
    p.add_argument("--proj", choices=("none", "pca", "haar"), default="none")
    p.add_argument("--var-threshold", type=float, default=0.95)
    p.add_argument("--max-components", type=int, default=30)
    p.add_argument("--levels", type=int, default=4, help="Haar levels kept")
    p.add_argument("--k", type=int, default=5, help="neighbours for knn")
    p.add_argument("--J", type=int, default=2, help="band size for mbd")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--hom-degree", type=int, default=1, help="homology degree of the rank functions")
    p.add_argument("--G", type=int, default=50, help="grid resolution")
    p.add_argument("--per-class", type=int, default=40, help="synthetic samples per class")
    _common(p)

    p = sub.add_parser("landscape", help="persistence landscapes of a diagram")
    p.add_argument("--input", required=True, help="diagram CSV")
    p.add_argument("--degree", type=int, default=0, help="homology degree")
    p.add_argument("--k-max", type=int, default=5, help="levels")
    p.add_argument("--samples", type=int, default=201, help="sample count on [0, cap]")
    _common(p)
    return parser


def _config_path(argv) -> str | None:
    for n, tok in enumerate(argv):
        if tok == "--config" and n + 1 < len(argv):
            return argv[n + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv) -> argparse.Namespace:
    """Parse flags, filling unset ones from ``--config`` when given."""
    argv = list(argv)
    parser = build_parser()
    path = _config_path(argv)
    if path is None:
        return parser.parse_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    subcommand = next((tok for tok in argv if tok in choices), None)
    if subcommand is None:
        return parser.parse_args(argv)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise io.InputError(f"cannot read config {path}: {exc}") from exc
    raw = parse_config_text(text)
    sub = raw.pop("subcommand", subcommand)
    if sub != subcommand:
        raise UsageError(f"config is for {sub!r}, not {subcommand!r}")
    subparser = choices[subcommand]
    known = {a.dest: a for a in subparser._actions if a.dest != "help"}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, value in raw.items():
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes")
        else:
            try:
                defaults[key] = action.type(value) if action.type else value
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        action.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def run_config(args: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(args).items() if k not in _ENVIRONMENT_KEYS | {"subcommand"}}
    opts = {k: (None if isinstance(v, float) and np.isinf(v) else v) for k, v in opts.items()}
    return RunConfig(args.subcommand, opts)


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


# ---- subcommands -----------------------------------------------------------

def _rips(args, out: Path) -> dict:
    pts = io.read_point_cloud(args.input)
    filt = vietoris_rips(distance_matrix(pts), args.max_dim, args.max_scale)
    if args.dump_filtration:
        io.write_filtration(out / "filtration.csv", filt)
    dgm = persistence_diagram(filt)
    io.write_diagram(out / "diagram.csv", dgm)
    return {"simplices": len(filt), "points": {q: len(dgm[q]) for q in dgm.degrees}}


def _sublevel(args, out: Path) -> dict:
    filt = sublevel_filtration(io.read_time_series(args.input))
    if args.dump_filtration:
        io.write_filtration(out / "filtration.csv", filt)
    dgm = persistence_diagram(filt)
    io.write_diagram(out / "diagram.csv", dgm)
    return {"simplices": len(filt), "points": {q: len(dgm[q]) for q in dgm.degrees}}


def _bifiltration(args, out: Path) -> dict:
    pts = io.read_point_cloud(args.input)
    data = distance_matrix(pts) if args.kind == "degree-rips" else pts
    grid = bifiltration_grid(data, args.kind, _floats(args.axis1), _floats(args.axis2), args.max_dim)
    inv = rank_invariant(grid, args.degree, args.threads)
    io.write_bi_rank_grid(out / "bi_rank.json", inv)
    return {"shape": list(grid.shape), "pairs": int(inv.comparable.sum())}


def _diagram(args, out: Path) -> dict:
    filt = io.read_filtration(args.input)
    filt.check_face_closure()
    dgm = barcode_to_diagram(compute_persistence(filt, args.max_degree, method=args.method))
    io.write_diagram(out / "diagram.csv", dgm)
    return {"points": {q: len(dgm[q]) for q in dgm.degrees}}


def _rank(args, out: Path) -> dict:
    dgm = io.read_diagram(args.input)
    lo, hi = grid_for([dgm], args.degree)
    t_min = lo if args.t_min is None else args.t_min
    t_max = args.t_max if args.t_max is not None else (dgm.cap if dgm.cap > t_min else hi)
    grid = rank_from_diagram(dgm, args.degree, t_min, t_max, args.G)
    if args.delta is not None:
        grid = truncate(grid, args.delta)
    io.write_rank_grid(out / "rank.json", grid)
    return {"l1_mass": grid.norm(1.0), "G": grid.resolution}


def _load_either(path):
    if str(path).endswith(".json"):
        return io.read_rank_grid(path)
    return io.read_diagram(path)


def _distance(args, out: Path) -> dict:
    a, b = _load_either(args.input), _load_either(args.input2)
    grids = [isinstance(x, RankGrid) for x in (a, b)]
    if any(grids) and not all(grids):
        raise io.InputError("compare two diagrams or two rank grids, not one of each")
    cert = None
    if args.metric == "lp":
        if not all(grids):
            lo, hi = grid_for([a, b], args.degree)
            a = rank_from_diagram(a, args.degree, lo, hi, args.G)
            b = rank_from_diagram(b, args.degree, lo, hi, args.G)
        value = lp_distance(a, b, args.p)
    elif all(grids):
        raise io.InputError(f"{args.metric} needs diagram inputs")
    elif args.metric == "landscape":
        hi = max(a.cap, b.cap, 1e-12)
        t = np.linspace(0.0, hi, 201)
        value = landscape_distance(landscape(a, args.degree, args.k_max, t),
                                   landscape(b, args.degree, args.k_max, t), args.p)
    elif args.metric == "bottleneck":
        value, cert = bottleneck(a, b, args.degree)
    else:
        value, cert = wasserstein(a, b, args.degree, args.p)
    result = {"metric": args.metric, "p": None if args.metric == "bottleneck" else args.p,
              "degree": args.degree, "value": value}
    if args.certificate and cert is not None:
        result["certificate"] = {"pairs": [list(pair) for pair in cert.pairs],
                                 "points1": cert.points1.tolist(), "points2": cert.points2.tolist()}
    io.write_json(out / "distance.json", result)
    return {"value": value}


def _stability(args, out: Path) -> dict:
    if args.p is None:
        args.p = 2.0 if args.prop == 14 else 1.0
    if args.prop == 14:
        eps = _floats(args.eps) if args.eps else None
        rows = counterexample_sweep(args.b, args.d, eps, args.p, args.G)
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eps", "p", "omega", "quadrature", "relative_error", "C", "rhs", "violates"])
            for r in rows:
                writer.writerow([repr(r.eps), r.p, repr(r.omega), repr(r.quadrature),
                                 repr(r.relative_error), r.C, repr(r.rhs), r.violates])
        for r in rows:
            print(f"eps={r.eps:.6g}  omega={r.omega:.6g}  {'>' if r.violates else '<='}  "
                  f"{r.C:g}*eps^{r.p:g}={r.rhs:.6g}")
        found = sum(r.violates for r in rows)
        summary = {"rows": len(rows), "violating_rows": found}
        print(f"summary: {found} of {len(rows)} eps values exceed the Holder bound")
        return summary
    if args.prop == 10:
        suite = truncated_suite(args.trials, (args.p,), tuple(_floats(args.delta)), args.seed)
    else:
        if args.p != int(args.p) or int(args.p) not in (1, 2):
            raise ValueError("the Wasserstein bound is checked for p = 1 or 2")
        suite = wasserstein_suite(args.trials, (int(args.p),), args.seed, args.constant)
    with open(out / "reports.jsonl", "w") as fh:
        for rep in suite.reports:
            fh.write(json.dumps(rep.to_dict(), sort_keys=True) + "\n")
    summary = {"trials": len(suite.reports), "admissible": len(suite.admissible),
               "violations": len(suite.violations), "max_ratio": suite.max_ratio}
    print(f"summary: prop {args.prop} p={args.p:g}: {summary['violations']} violations in "
          f"{summary['admissible']} admissible trials, max lhs/rhs {summary['max_ratio']:.4f}")
    return summary


def _hrv_dataset(args):
    root = Path(args.hrv_dir)
    rows = list(csv.reader((root / "labels.csv").read_text().splitlines()))
    rows = [r for r in rows if r and not r[0].startswith("#") and r[0] != "file"]
    if not rows:
        raise io.InputError(f"{root}/labels.csv lists no files")
    dgms, labels = [], []
    for name, label in rows:
        dgms.append(persistence_diagram(sublevel_filtration(io.read_time_series(root / name))))
        labels.append(int(label))
    return rank_dataset(dgms, labels, 0, args.G)


def _manifest_dataset(args):
    rows = [r for r in csv.reader(Path(args.input).read_text().splitlines())
            if r and not r[0].startswith("#") and r[0] != "path"]
    base = Path(args.input).parent
    dgms = [io.read_diagram(base / r[0]) for r in rows]
    try:
        labels = [int(r[1]) for r in rows]
    except (IndexError, ValueError):
        raise io.InputError(f"{args.input}: rows must be path,label") from None
    return rank_dataset(dgms, labels, args.hom_degree, args.G)


def _classify(args, out: Path) -> dict:
    if args.hrv_dir:
        ds = _hrv_dataset(args)
        source = "hrv"
    elif args.input:
        ds = _manifest_dataset(args)
        source = "manifest"
    else:
        ds = circles_and_discs_dataset(args.per_class, args.seed, args.G, threads=args.threads)
        source = "circles-discs"
    kernel = KernelSpec(args.kernel, args.degree, args.gamma)
    results = []
    for C in _floats(args.C):
        pipe = Pipeline(args.pipeline, kernel, C, args.proj, args.var_threshold,
                        args.max_components, args.levels, args.k, args.J)
        results.append((C, cross_validate(ds, pipe, args.folds, args.iterations, args.seed)))
    best_C, best = max(results, key=lambda r: (r[1].accuracy, r[1].auc_roc))
    report = best.to_dict() | {"C": best_C, "source": source,
                               "grid": {str(C): r.accuracy for C, r in results}}
    io.write_json(out / "eval.json", report)
    method = args.pipeline.upper()
    if args.pipeline == "svm":
        method += f" {args.kernel}" + (f" d={args.degree}" if args.kernel == "polynomial" else "")
    if args.proj != "none":
        method += f" + {args.proj}"
    with open(out / "table.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Method", "Accuracy", "AUC-ROC", "Runtime (s)"])
        writer.writerow([method, f"{best.accuracy:.1f}", f"{best.auc_roc:.3f}", f"{best.runtime_seconds:.2f}"])
    print(f"{method}: accuracy {best.accuracy:.1f}, AUC {best.auc_roc:.3f}")
    return {"accuracy": best.accuracy, "auc_roc": best.auc_roc}


def _landscape(args, out: Path) -> dict:
    dgm = io.read_diagram(args.input)
    hi = dgm.cap if dgm.cap > 0 else 1.0
    t = np.linspace(0.0, hi, args.samples)
    levels = landscape(dgm, args.degree, args.k_max, t)
    with open(out / "landscape.csv", "w", newline="") as fh:
        fh.write(io.schema_header("landscape"))
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"lambda_{lv.k}" for lv in levels])
        for n, tv in enumerate(t):
            writer.writerow([repr(float(tv))] + [repr(float(lv.values[n])) for lv in levels])
    return {"levels": len(levels)}


HANDLERS = {"rips": _rips, "sublevel": _sublevel, "bifiltration": _bifiltration,
            "diagram": _diagram, "rank": _rank, "distance": _distance,
            "stability-check": _stability, "classify": _classify, "landscape": _landscape}


def run(args: argparse.Namespace) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        os.environ["RANKFN_THREADS"] = str(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = run_config(args)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    summary = HANDLERS[args.subcommand](args, out)
    record = {"schema": f"rankfn/run/{io.SCHEMA_VERSION}", "config": config.to_dict(),
              "seed": args.seed, "versions": _versions(), "started": started,
              "wall_clock_seconds": time.perf_counter() - t0, "summary": summary}
    io.write_json(out / "run.json", json.loads(json.dumps(record, default=str)))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except io.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (io.InputError, FiltrationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # anything else is a bug or a broken invariant
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
