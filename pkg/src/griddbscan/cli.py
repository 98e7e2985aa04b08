"""Command-line front end: load or generate points, cluster, write labels and a report."""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Clustering, Dataset, Params, UsageError
from .datagen import generate, parse_gen
from .engine import DEFAULT_RHO, METHODS, MethodConfig, RunStats, run_dbscan
from .oracle import ORACLE_CAP, check_approx_valid, clustering_equal, dbscan_bruteforce

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class LoadError(Exception):
    """Malformed or unreadable input file."""


def load_csv(path) -> Dataset:
    """Read comma- or whitespace-separated reals, one point per line.

    Lines starting with ``#`` and blank lines are skipped.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f.strip() for f in text.split(",")] if "," in text else text.split()
            try:
                row = [float(f) for f in fields]
            except ValueError:
                bad = next(i for i, f in enumerate(fields, 1) if not _is_float(f))
                raise LoadError(f"{path}:{lineno}: column {bad}: cannot parse {fields[bad - 1]!r}") from None
            for col, x in enumerate(row, 1):
                if not math.isfinite(x):
                    raise LoadError(f"{path}:{lineno}: column {col}: non-finite value {fields[col - 1]!r}")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise LoadError(f"{path}:{lineno}: expected {width} columns, found {len(row)}")
            rows.append(row)
    if not rows:
        raise LoadError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_csv(ds: Dataset, path) -> None:
    np.savetxt(path, ds.points, fmt="%.17g", delimiter=",")


def format_output(c: Clustering) -> str:
    kinds = c.kinds()
    labels = c.labels.astype(str)
    off = c.offsets
    lines = [f"{i},{kinds[i]},{';'.join(labels[off[i]:off[i + 1]])}" for i in range(c.n)]
    return "\n".join(lines) + "\n" if lines else ""


def write_output(c: Clustering, path) -> None:
    """One ``index,core|border|noise,label[;label...]`` line per point."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_output(c))
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


@dataclass
class RunReport:
    config: dict = field(default_factory=dict)
    stats: RunStats = field(default_factory=RunStats)
    clusters: int = 0
    counts: dict = field(default_factory=dict)
    verify: str | None = None

    def lines(self) -> list[str]:
        out = [f"{k} = {v}" for k, v in self.config.items()]
        t = self.stats.timings
        for key in ("cells", "mark_core", "cluster_core", "cluster_border", "total"):
            out.append(f"time_{key} = {t.get(key, 0.0):.6f}")
        st = self.stats
        out += [f"connectivity_queries = {st.connectivity_queries}",
                f"distance_computations = {st.distance_computations}",
                f"quadtree_visits = {st.quadtree_visits}",
                f"num_cells = {st.num_cells}",
                f"threads_used = {st.threads}",
                f"clusters = {self.clusters}"]
        out += [f"{k} = {self.counts.get(k, 0)}" for k in ("core", "border", "noise")]
        if self.verify is not None:
            out.append(f"verify = {self.verify}")
        return out

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines()) + "\n")


def parse_report(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="griddbscan", description="Grid-based exact and approximate DBSCAN.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file of points")
    src.add_argument("--gen", metavar="FAMILY:N:D:SEED",
                     help="generate points instead (uniform, ss-simden, ss-varden)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--minpts", type=int, required=True)
    p.add_argument("--rho", type=float, help=f"approximation factor (approx methods, default {DEFAULT_RHO})")
    p.add_argument("--method", choices=list(METHODS), default="exact")
    p.add_argument("--bucketing", action="store_true")
    p.add_argument("--threads", type=int, default=0, help="0 uses all hardware threads")
    p.add_argument("--block-size", type=int, default=32)
    p.add_argument("--leaf-cap", type=int, default=16)
    p.add_argument("--output", required=True)
    p.add_argument("--report")
    p.add_argument("--verify", action="store_true", help=f"check against the brute-force oracle (n <= {ORACLE_CAP})")
    return p


def run_cli(args: argparse.Namespace) -> int:
    try:
        cfg = MethodConfig.from_method(args.method, bucketing=args.bucketing, threads=args.threads,
                                       block_size=args.block_size, leaf_cap=args.leaf_cap)
        if args.rho is not None and not cfg.approximate:
            raise UsageError(f"--rho only applies to approx methods, not {args.method}")
        rho = (args.rho if args.rho is not None else DEFAULT_RHO) if cfg.approximate else None
        params = Params(args.eps, args.minpts, rho)
        ds = generate(parse_gen(args.gen)) if args.gen else load_csv(args.input)
        cfg.validate(ds.d, params)
        if args.verify and ds.n > ORACLE_CAP:
            raise UsageError(f"--verify needs n <= {ORACLE_CAP}, got {ds.n}")
    except UsageError as e:
        print(f"griddbscan: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LoadError, OSError) as e:
        print(f"griddbscan: error: {e}", file=sys.stderr)
        return EXIT_IO

    stats = RunStats()
    c = run_dbscan(ds, params, cfg, stats)
    report = RunReport(
        config=dict(method=args.method, cell_method=cfg.cell_method, mark_core=cfg.mark_core,
                    connectivity=cfg.connectivity, bucketing=cfg.bucketing, threads=args.threads,
                    block_size=cfg.block_size, leaf_cap=cfg.leaf_cap, eps=params.eps,
                    min_pts=params.min_pts, rho=params.rho, n=ds.n, d=ds.d),
        stats=stats, clusters=c.num_clusters, counts=c.counts())
    status = EXIT_OK
    if args.verify:
        t = time.perf_counter()
        if cfg.approximate:
            r = check_approx_valid(ds, params, c)
            ok, detail = r.valid, r.message
        else:
            ok = clustering_equal(c, dbscan_bruteforce(ds, params))
            detail = "differs from the brute-force clustering"
        report.verify = "pass" if ok else "fail"
        report.config["verify_seconds"] = round(time.perf_counter() - t, 6)
        if not ok:
            print(f"griddbscan: verification failed: {detail}", file=sys.stderr)
            status = EXIT_VERIFY
    try:
        write_output(c, args.output)
        if args.report:
            report.write(args.report)
    except OSError as e:
        print(f"griddbscan: error: {e}", file=sys.stderr)
        return EXIT_IO
    return status


def main(argv=None) -> int:
    return run_cli(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
