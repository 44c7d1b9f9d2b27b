"""``fdepth`` command-line interface.

Data goes to stdout or the named output files, diagnostics to stderr.
Exit status: 0 on success, 2 for usage or input errors, 3 when an internal
invariant is violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import (
    SilhouetteReport,
    cut_tree,
    silhouette,
    ward_linkage,
    write_labels_csv,
    write_silhouette_csv,
)
from .dataset import DatasetError, as_tau, load_csv, select_tau
from .depth import DepthMethod, DepthReport, depth_all
from .finite_dim import as_sample, local_depth_hr_finite_all
from .local_depth import local_depth_all
from .montecarlo import IidProcessSpec, consistency_experiment
from .similarity import (
    InvariantError,
    SimilarityMethod,
    gower_dissimilarity,
    similarity_matrix,
    write_matrix_binary,
    write_matrix_csv,
    write_matrix_stream,
)


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _k_range(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty k range")
    return out


def set_threads(n: int | None) -> None:
    if n is None:
        env = os.environ.get("FDEPTH_THREADS")
        n = int(env) if env else None
    if n is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _load(args):
    return load_csv(args.input, byrow=not args.bycol, has_header=args.header, label_column=args.labels)


def _read_tau_file(path: Path) -> list[float]:
    with path.open(newline="", encoding="utf-8") as fh:
        cells = [c for row in csv.reader(fh) for c in row if c.strip()]
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise UsageError(f"{path}: tau file must hold numbers only") from None


def _resolve_tau(args, ds, required: bool):
    if getattr(args, "tau_prob", None) is not None:
        sel = select_tau(ds, [args.tau_prob])
        print(f"tau = {sel.quantiles[0]!r} (quantile order {args.tau_prob})", file=sys.stderr)
        return as_tau(sel.quantiles[0], ds.p)
    raw = getattr(args, "tau", None)
    if raw is None:
        if required:
            raise UsageError("this command needs --tau or --tau-prob")
        return None
    try:
        value = float(raw)
    except ValueError:
        path = Path(raw)
        if not path.exists():
            raise UsageError(f"--tau is neither a number nor an existing file: {raw}") from None
        value = _read_tau_file(path)
    return as_tau(value, ds.p)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_tau(args) -> None:
    ds = _load(args)
    print(select_tau(ds, args.probs, keep_stats=args.stats).to_json())


def _finite_depths(ds, tau):
    sample = as_sample(ds.curves)
    glob = local_depth_hr_finite_all(sample, np.inf)
    loc = local_depth_hr_finite_all(sample, tau) if tau is not None else None
    return DepthReport.from_values("hr", glob), (
        DepthReport.from_values("hr", loc, tau=tau) if loc is not None else None
    )


def _depth_reports(args, ds, tau):
    method = DepthMethod.parse(args.method)
    if getattr(args, "finite", False):
        if method is not DepthMethod.HR:
            raise UsageError("--finite supports --method hr only")
        return _finite_depths(ds, tau)
    glob = depth_all(ds, method)
    loc = local_depth_all(ds, tau, method) if tau is not None else None
    return glob, loc


def cmd_depth(args) -> None:
    ds = _load(args)
    tau = _resolve_tau(args, ds, required=False)
    glob, loc = _depth_reports(args, ds, tau)
    if args.json:
        out = {"depth": glob.to_dict()}
        if loc is not None:
            out["local_depth"] = loc.to_dict()
        _emit(json.dumps(out) + "\n", args.out)
        return
    labels = ds.curve_labels()
    if loc is None:
        rows = [[l, repr(float(v)), int(r)] for l, v, r in zip(labels, glob.values, glob.ranks)]
        text = _rows_csv(["label", "depth", "rank"], rows)
    else:
        rows = [
            [l, repr(float(v)), repr(float(lv)), int(r), int(lr)]
            for l, v, lv, r, lr in zip(labels, glob.values, loc.values, glob.ranks, loc.ranks)
        ]
        text = _rows_csv(["label", "depth", "local_depth", "rank", "local_rank"], rows)
    _emit(text, args.out)


def cmd_ddplot(args) -> None:
    ds = _load(args)
    tau = _resolve_tau(args, ds, required=True)
    glob, loc = _depth_reports(args, ds, tau)
    rows = [[l, repr(float(v)), repr(float(lv))] for l, v, lv in zip(ds.curve_labels(), glob.values, loc.values)]
    _emit(_rows_csv(["label", "depth", "local_depth"], rows), args.out)


def _similarity_tau(args, ds, method):
    if method.is_local:
        return _resolve_tau(args, ds, required=True)
    if args.tau is not None or args.tau_prob is not None:
        print(f"warning: method {method.value!r} is not local; tau ignored", file=sys.stderr)
    return None


def cmd_similarity(args) -> None:
    ds = _load(args)
    method = SimilarityMethod.parse(args.method)
    tau = _similarity_tau(args, ds, method)
    if args.block_rows:
        if not args.out:
            raise UsageError("--block-rows needs --out")
        write_matrix_stream(ds, args.out, method, tau, args.block_rows, args.dissimilarity, args.format)
        return
    S = similarity_matrix(ds, method, tau)
    M = gower_dissimilarity(S) if args.dissimilarity else S
    if args.format == "binary":
        if not args.out:
            raise UsageError("binary output needs --out")
        write_matrix_binary(M, args.out)
    elif args.out:
        write_matrix_csv(M, args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        labels = ds.curve_labels()
        w.writerow(["label", *labels])
        for lab, row in zip(labels, M.values):
            w.writerow([lab, *(repr(float(v)) for v in row)])
        sys.stdout.write(buf.getvalue())


def cmd_cluster(args) -> None:
    ds = _load(args)
    method = SimilarityMethod.parse(args.method)
    tau = _similarity_tau(args, ds, method)
    ks = args.k
    bad = [k for k in ks if not 1 <= k <= ds.n]
    if bad:
        raise UsageError(f"k must lie in [1, {ds.n}], got {bad}")
    if ds.n < 2:
        raise UsageError("clustering needs at least two curves")
    D = gower_dissimilarity(similarity_matrix(ds, method, tau))
    dg = ward_linkage(D, squared=args.ward2)
    prefix = args.out_prefix
    Path(f"{prefix}.dendrogram.json").write_text(dg.to_json() + "\n", encoding="utf-8")
    names = ds.curve_labels()
    summary = []
    for k in ks:
        labels = cut_tree(dg, k)
        if k == 1:
            print("warning: k=1 gives a single cluster; silhouette widths are 0", file=sys.stderr)
            report = SilhouetteReport(np.zeros(ds.n), {1: 0.0}, 0.0, degenerate=True)
        else:
            report = silhouette(labels, D)
        write_labels_csv(f"{prefix}.k{k}.labels.csv", labels, names)
        write_silhouette_csv(f"{prefix}.k{k}.silhouette.csv", labels, report, names)
        summary.append([k, repr(report.mean)])
    sys.stdout.write(_rows_csv(["k", "mean_silhouette"], summary))


def cmd_consistency(args) -> None:
    spec = IidProcessSpec(args.marginal, tuple(args.params), args.p, args.seed)
    y = np.broadcast_to(np.asarray(args.y, dtype=float), (args.p,)) if len(args.y) == 1 else np.asarray(args.y)
    tau = args.tau_value[0] if len(args.tau_value) == 1 else args.tau_value
    report = consistency_experiment(spec, y, tau, args.sizes, args.replicates, args.seed)
    print(report.to_json() if args.json else report.table())


def _add_input(sp):
    sp.add_argument("input", help="CSV file, one curve per row")
    sp.add_argument("--bycol", action="store_true", help="curves are columns instead of rows")
    sp.add_argument("--header", action="store_true", help="skip a header line")
    sp.add_argument("--labels", action="store_true", help="first column holds curve labels")


def _add_tau(sp):
    sp.add_argument("--tau", help="threshold: a number, or a CSV file with one value per grid point")
    sp.add_argument("--tau-prob", type=float, help="set tau to this quantile of pairwise sup distances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdepth", description="Local half-region depth for functional data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, help="worker threads (default: $FDEPTH_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("tau", help="quantiles of pairwise sup-norm distances")
    _add_input(sp)
    sp.add_argument("--probs", type=_floats, default=[0.05, 0.1, 0.2, 0.3])
    sp.add_argument("--stats", action="store_true", help="include every pairwise distance")
    sp.set_defaults(func=cmd_tau)

    sp = sub.add_parser("depth", help="global and (with tau) local depth per curve")
    _add_input(sp)
    _add_tau(sp)
    sp.add_argument("--method", choices=["hr", "mhr"], default="mhr")
    sp.add_argument("--finite", action="store_true", help="treat rows as points in R^p (half-region only)")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_depth)

    sp = sub.add_parser("ddplot", help="depth vs local depth table")
    _add_input(sp)
    _add_tau(sp)
    sp.add_argument("--method", choices=["hr", "mhr"], default="mhr")
    sp.add_argument("--finite", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ddplot)

    sp = sub.add_parser("similarity", help="pairwise similarity or Gower dissimilarity matrix")
    _add_input(sp)
    _add_tau(sp)
    sp.add_argument("--method", choices=[m.value for m in SimilarityMethod], default="localmhr")
    sp.add_argument("--dissimilarity", action="store_true")
    sp.add_argument("--format", choices=["csv", "binary"], default="csv")
    sp.add_argument("--block-rows", type=int, help="stream the matrix in blocks of this many rows")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_similarity)

    sp = sub.add_parser("cluster", help="Ward clustering of the Gower dissimilarity")
    _add_input(sp)
    _add_tau(sp)
    sp.add_argument("--method", choices=[m.value for m in SimilarityMethod], default="localmhr")
    sp.add_argument("--k", type=_k_range, default=[2, 3, 4], help="e.g. 2-5 or 2,3")
    sp.add_argument("--ward2", action="store_true", help="square dissimilarities first (Ward.D2)")
    sp.add_argument("--out-prefix", required=True)
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("consistency", help="Monte Carlo check of sample vs population local depth")
    sp.add_argument("--marginal", choices=["gaussian", "uniform"], default="gaussian")
    sp.add_argument("--params", type=_floats, default=[0.0, 1.0])
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--y", type=_floats, default=[0.0])
    sp.add_argument("--tau", dest="tau_value", type=_floats, default=[1.0])
    sp.add_argument("--sizes", type=lambda s: [int(v) for v in _floats(s)], default=[100, 1000, 10000])
    sp.add_argument("--replicates", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_consistency)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_threads(args.threads)
        args.func(args)
    except InvariantError as exc:
        print(f"fdepth: internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except (UsageError, DatasetError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"fdepth: {exc}", file=sys.stderr)
        return 2
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
