"""Command-line interface.

Exit codes for ``test`` and ``hsic``: 0 null accepted, 3 null rejected,
1 usage error, 2 data error.  Other subcommands exit 0 on success.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .data import SCENARIOS, scenario_pair
from .independence import hsic_input_from_samples, hsic_permutation_test
from .kernels import KernelSpec, median_heuristic
from .matching import columns, cost_matrix, hungarian, split_half
from .two_sample import TestConfig, TestResult, run_two_sample_test, witness

EXIT_ACCEPT, EXIT_USAGE, EXIT_DATA, EXIT_REJECT = 0, 1, 2, 3

METHOD_NAMES = {
    "biased-bound": "biased_bound",
    "hoeffding": "unbiased_hoeffding",
    "bootstrap": "bootstrap",
    "pearson": "pearson",
    "spectral": "spectral",
    "linear": "linear",
}

BENCH_COLUMNS = ["scenario", "d", "m", "method", "reject_rate", "mean_runtime_ms"]
BENCH_MEDIAN_CAP = 500


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ingestion

def parse_csv(path, has_header: bool = False, delimiter: str = ",") -> np.ndarray:
    """Read a rectangular numeric table; rows are observations, columns dimensions."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}") from err
    rows = [r for r in csv.reader(io.StringIO(text), delimiter=delimiter) if r and any(c.strip() for c in r)]
    if has_header and rows:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: empty input")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: ragged row {i + 1} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {cell!r} at row {i + 1}, column {j + 1}") from None
    return out


# reports

@dataclass
class RunReport:
    statistic: float
    statistic_type: str
    threshold: float | None
    p_value: float | None
    alpha: float
    reject: bool
    method: str
    kernel: dict
    m: int
    n: int
    seed: int
    runtime_ms: float
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @classmethod
    def from_result(cls, res: TestResult, inputs=None, config=None) -> RunReport:
        thr = res.threshold if math.isfinite(res.threshold) else None
        kernel = res.kernel.describe() if res.kernel is not None else {"family": None, "sigma": None, "bound_K": None}
        return cls(
            statistic=float(res.statistic.value),
            statistic_type=res.statistic.kind,
            threshold=thr,
            p_value=res.p_value,
            alpha=res.alpha,
            reject=res.reject,
            method=res.method,
            kernel=kernel,
            m=res.m,
            n=res.n,
            seed=res.seed,
            runtime_ms=res.runtime_ms,
            inputs=inputs or {},
            config=config or {},
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls(**json.loads(text))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# kernel flags

def _kernel_from_flags(kind: str, sigma: str, X, Y, bound_k: float | None = None):
    """Return (KernelSpec or None, X, Y); None means median-auto."""
    if kind.startswith("gram:"):
        try:
            _, path, split = kind.rsplit(":", 2)
            split = int(split)
        except ValueError:
            raise UsageError(f"--kernel gram expects gram:FILE:SPLIT, got {kind!r}") from None
        mat = parse_csv(path)
        try:
            return KernelSpec.precomputed(mat, split, bound_K=bound_k), None, None
        except ValueError as err:
            raise DataError(str(err)) from err
    if bound_k is not None:
        raise UsageError("--bound-k applies only to gram:FILE:SPLIT kernels")
    if kind == "linear":
        return KernelSpec.linear(), X, Y
    if kind not in ("gaussian", "laplace"):
        raise UsageError(f"unknown kernel {kind!r}")
    if sigma == "median":
        return None, X, Y
    try:
        s = float(sigma)
    except ValueError:
        raise UsageError(f"--sigma must be 'median' or a number, got {sigma!r}") from None
    if not s > 0:
        raise UsageError(f"--sigma must be positive, got {s}")
    return KernelSpec(kind, sigma=s), X, Y


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"--alpha must lie in (0, 1), got {alpha}")


# subcommands

def cmd_test(args) -> int:
    _check_alpha(args.alpha)
    if args.bootstrap_iters < 1:
        raise UsageError("--bootstrap-iters must be >= 1")
    is_gram = args.kernel.startswith("gram:")
    if not is_gram and (args.x is None or args.y is None):
        raise UsageError("--x and --y are required unless --kernel gram:FILE:SPLIT is used")
    X = parse_csv(args.x, args.header, args.delimiter) if args.x else None
    Y = parse_csv(args.y, args.header, args.delimiter) if args.y else None
    spec, X, Y = _kernel_from_flags(args.kernel, args.sigma, X, Y, args.bound_k)
    cfg = TestConfig(
        method=METHOD_NAMES[args.method],
        kernel=spec if spec is not None else "median-auto",
        kernel_family=args.kernel if spec is None else "gaussian",
        alpha=args.alpha,
        bootstrap_B=args.bootstrap_iters,
        n_sim=args.n_sim,
        seed=args.seed,
        bootstrap_statistic=args.bootstrap_statistic,
    )
    try:
        res = run_two_sample_test(X, Y, cfg)
    except ValueError as err:
        raise DataError(str(err)) from err
    config = {
        "method": args.method, "kernel": args.kernel, "sigma": args.sigma, "alpha": args.alpha,
        "bootstrap_iters": args.bootstrap_iters, "n_sim": args.n_sim, "seed": args.seed,
        "bootstrap_statistic": args.bootstrap_statistic, "bound_k": args.bound_k,
    }
    report = RunReport.from_result(res, {"x": args.x, "y": args.y}, config)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_REJECT if res.reject else EXIT_ACCEPT


def cmd_hsic(args) -> int:
    _check_alpha(args.alpha)
    x = parse_csv(args.x, args.header, args.delimiter)
    y = parse_csv(args.y, args.header, args.delimiter)
    try:
        res = hsic_permutation_test(hsic_input_from_samples(x, y), args.bootstrap_iters, args.alpha, args.seed)
    except ValueError as err:
        raise DataError(str(err)) from err
    config = {"alpha": args.alpha, "bootstrap_iters": args.bootstrap_iters, "seed": args.seed}
    report = RunReport.from_result(res, {"x": args.x, "y": args.y}, config)
    report.kernel = {"family": "gaussian", "sigma": "median-per-variable", "bound_K": 1.0}
    _emit(report.to_json() + "\n", args.out)
    return EXIT_REJECT if res.reject else EXIT_ACCEPT


def cmd_match(args) -> int:
    if args.table:
        A, B = split_half(parse_csv(args.table, args.header, args.delimiter), args.split_seed)
    elif args.a and args.b:
        A = parse_csv(args.a, args.header, args.delimiter)
        B = parse_csv(args.b, args.header, args.delimiter)
    else:
        raise UsageError("give either --table or both --a and --b")
    spec, _, _ = _kernel_from_flags(args.kernel, args.sigma, None, None)
    cfg = TestConfig(kernel=spec if spec is not None else "median-auto",
                     kernel_family=args.kernel if spec is None else "gaussian")
    try:
        C = cost_matrix(columns(A), columns(B), cfg, statistic=args.statistic)
    except ValueError as err:
        raise DataError(str(err)) from err
    assignment = hungarian(C)
    payload = {
        "perm": list(assignment.perm),
        "total_cost": assignment.total_cost,
        "statistic": args.statistic,
        "cost_matrix": C.tolist(),
        "version": __version__,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_ACCEPT


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, num = spec.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    except ValueError:
        raise UsageError(f"--grid expects LO:HI:N, got {spec!r}") from None


def cmd_witness(args) -> int:
    X = parse_csv(args.x, args.header, args.delimiter)
    Y = parse_csv(args.y, args.header, args.delimiter)
    if args.queries:
        T = parse_csv(args.queries, args.header, args.delimiter)
    elif args.grid:
        T = _parse_grid(args.grid)[:, None]
    else:
        raise UsageError("give --queries FILE or --grid LO:HI:N")
    spec, _, _ = _kernel_from_flags(args.kernel, args.sigma, X, Y)
    if spec is None:
        spec = KernelSpec(args.kernel, sigma=median_heuristic(np.vstack([X, Y])))
    if spec.family == "precomputed":
        raise UsageError("witness needs a pointwise kernel")
    try:
        w = witness(X, Y, spec, T)
    except ValueError as err:
        raise DataError(str(err)) from err
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"t{j}" for j in range(T.shape[1])] + ["witness"])
    for t, val in zip(T, w):
        writer.writerow([repr(float(c)) for c in t] + [repr(float(val))])
    _emit(buf.getvalue(), args.out)
    return EXIT_ACCEPT


def _int_list(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {s!r}") from None


def run_benchmark(scenario, dims, sizes, methods, replicates, seed, shift, alpha=0.05,
                  bootstrap_iters=150, n_sim=5000) -> list[dict]:
    """Rejection rate and mean runtime per (d, m, method); deterministic given ``seed``.

    All methods see the same data in a replicate.  Sigma is the median
    heuristic on at most ``BENCH_MEDIAN_CAP`` points from each sample, computed
    outside the timed region.
    """
    rows = []
    root = np.random.SeedSequence(seed)
    cells = [(d, m) for d in dims for m in sizes]
    cap = BENCH_MEDIAN_CAP
    for (d, m), cell_seed in zip(cells, root.spawn(len(cells))):
        rejects = {meth: 0 for meth in methods}
        times = {meth: 0.0 for meth in methods}
        reps = [rep_seed.spawn(2) for rep_seed in cell_seed.spawn(replicates)]
        # first pass: bandwidths only.  The median heuristic sweeps a large distance
        # array, so running it between timed calls would bill its cache misses to them.
        sigmas = []
        for data_seed, _ in reps:
            X, Y = scenario_pair(scenario, m, d, shift, np.random.default_rng(data_seed))
            sigmas.append(median_heuristic(np.vstack([X[:cap], Y[:cap]])))
        for (data_seed, test_seed), sigma in zip(reps, sigmas):
            X, Y = scenario_pair(scenario, m, d, shift, np.random.default_rng(data_seed))
            spec = KernelSpec.gaussian(sigma)
            int_seed = int(test_seed.generate_state(1, np.uint64)[0])
            for meth in methods:
                cfg = TestConfig(method=METHOD_NAMES[meth], kernel=spec, alpha=alpha,
                                 bootstrap_B=bootstrap_iters, n_sim=n_sim, seed=int_seed)
                res = run_two_sample_test(X, Y, cfg)
                rejects[meth] += res.reject
                times[meth] += res.runtime_ms
        for meth in methods:
            rows.append({
                "scenario": scenario, "d": d, "m": m, "method": meth,
                "reject_rate": rejects[meth] / replicates,
                "mean_runtime_ms": times[meth] / replicates,
            })
    return rows


def cmd_benchmark(args) -> int:
    _check_alpha(args.alpha)
    methods = [s for s in args.methods.split(",") if s]
    bad = [s for s in methods if s not in METHOD_NAMES]
    if bad or not methods:
        raise UsageError(f"unknown methods {bad}; choose from {sorted(METHOD_NAMES)}")
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    shift = args.shift
    if shift is None:
        shift = 1.0 if args.scenario == "var-shift" else 0.0
    rows = run_benchmark(args.scenario, _int_list(args.dims), _int_list(args.sizes), methods,
                         args.replicates, args.seed, shift, args.alpha, args.bootstrap_iters, args.n_sim)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({**row, "reject_rate": f"{row['reject_rate']:.6g}",
                         "mean_runtime_ms": f"{row['mean_runtime_ms']:.6g}"})
    _emit(buf.getvalue(), args.out)
    return EXIT_ACCEPT


# parser

def _io_flags(p):
    p.add_argument("--header", action="store_true", help="skip the first row of every CSV input")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--out", help="write output to this file instead of stdout")


def _kernel_flags(p):
    p.add_argument("--kernel", default="gaussian",
                   help="gaussian | laplace | linear | gram:FILE:SPLIT (SPLIT = m, X rows first)")
    p.add_argument("--sigma", default="median", help="'median' (pooled median heuristic) or a number")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmmd", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"kmmd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="two-sample test; exit 0 accept, 3 reject, 1 usage, 2 data error")
    p.add_argument("--x", help="CSV of the first sample")
    p.add_argument("--y", help="CSV of the second sample")
    p.add_argument("--method", choices=sorted(METHOD_NAMES), default="bootstrap")
    _kernel_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-iters", type=int, default=150)
    p.add_argument("--n-sim", type=int, default=5000, help="draws for the spectral null")
    p.add_argument("--bootstrap-statistic", choices=("mmd_u_sq", "mmd_b"), default="mmd_u_sq")
    p.add_argument("--bound-k", type=float, default=None,
                   help="declared kernel bound K for gram:FILE:SPLIT (needed by the bound tests)")
    p.add_argument("--seed", type=int, default=0)
    _io_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("hsic", help="HSIC permutation test of independence between paired x and y")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-iters", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    _io_flags(p)
    p.set_defaults(func=cmd_hsic)

    p = sub.add_parser("match", help="match attributes (columns) of two tables with the Hungarian method")
    p.add_argument("--a", help="CSV table A (columns are attributes)")
    p.add_argument("--b", help="CSV table B")
    p.add_argument("--table", help="single table split into halves A and B")
    p.add_argument("--split-seed", type=int, default=None, help="shuffle rows before splitting")
    p.add_argument("--statistic", choices=("mmd_u_sq", "mmd_b"), default="mmd_u_sq")
    _kernel_flags(p)
    _io_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("witness", help="evaluate the empirical witness function at query points")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--queries", help="CSV of query points")
    p.add_argument("--grid", help="1-D grid LO:HI:N")
    _kernel_flags(p)
    _io_flags(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("benchmark", help="rejection rate and runtime table on synthetic data (CSV)")
    p.add_argument("--scenario", choices=SCENARIOS, default="mean-shift")
    p.add_argument("--dims", default="1")
    p.add_argument("--sizes", default="100")
    p.add_argument("--methods", default="bootstrap,linear")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--shift", type=float, default=None,
                   help="mean distance (mean-shift, default 0) or std ratio (var-shift, default 1)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-iters", type=int, default=150)
    p.add_argument("--n-sim", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help and --version exit 0, parse errors exit EXIT_USAGE
        return exc.code
    try:
        return args.func(args)
    except UsageError as err:
        print(f"kmmd: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"kmmd: data error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
