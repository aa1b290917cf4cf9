"""Command-line front end: ``catclust solve | generate | crosscheck``.

Instance files are plain text::

    m n sigma
    <row 1: n symbols>
    ...
    <row m: n symbols>

so column j of the matrix is the j-th value across the rows.  Reports are
JSON documents described by ``report_schema.json``; cluster indices in them
are 1-based.  Exit codes: 0 yes, 1 no (or disagreements), 2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import fpt, kernel, oracle, variants
from .core import (
    Balanced,
    Capacitated,
    CategoricalMatrix,
    Equal,
    FactorBalanced,
    Instance,
    InstanceError,
    ResourceError,
    Unconstrained,
    check_constraint,
)
from .metric import make_clustering

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2
SOLVERS = ("fpt", "brute-partition", "brute-medians")
VARIANTS = ("capacitated", "balanced", "factor", "equal", "unconstrained")


class ParseError(InstanceError):
    pass


# -- instance I/O -----------------------------------------------------------


def parse_instance(text: str) -> CategoricalMatrix:
    """Parse the text format; errors name the 1-based line and column."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("line 1: empty input, expected header 'm n sigma'")

    def ints(lineno: int, expected: int | None):
        out = []
        for col, tok in enumerate(lines[lineno - 1].split(), start=1):
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}, column {col}: {tok!r} is not an integer") from None
            if v < 0:
                raise ParseError(f"line {lineno}, column {col}: negative value {v}")
            out.append(v)
        if expected is not None and len(out) != expected:
            raise ParseError(f"line {lineno}: expected {expected} values, found {len(out)}")
        return out

    m, n, sigma = ints(1, 3)
    if m < 1 or n < 1 or sigma < 1:
        raise ParseError("line 1: m, n and sigma must be positive")
    if len(lines) != m + 1:
        raise ParseError(f"line {len(lines) + 1 if len(lines) < m + 1 else m + 2}: "
                         f"expected {m} matrix rows after the header, found {len(lines) - 1}")
    rows = []
    for i in range(m):
        row = ints(i + 2, n)
        for col, v in enumerate(row, start=1):
            if v >= sigma:
                raise ParseError(f"line {i + 2}, column {col}: symbol {v} is not below sigma={sigma}")
        rows.append(row)
    return CategoricalMatrix.from_rows(rows, sigma)


def format_instance(matrix: CategoricalMatrix) -> str:
    lines = [f"{matrix.m} {matrix.n} {matrix.sigma}"]
    lines += [" ".join(str(int(v)) for v in row) for row in matrix.rows()]
    return "\n".join(lines) + "\n"


def read_instance(path: str) -> CategoricalMatrix:
    if path == "-":
        return parse_instance(sys.stdin.read())
    return parse_instance(Path(path).read_text())


# -- solving ----------------------------------------------------------------


def parse_alpha(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"alpha must look like NUM/DEN, got {text!r}") from None


def build_constraint(args):
    v = args.variant
    if v == "capacitated":
        if args.p is None or args.q is None:
            raise InstanceError("capacitated needs -p and -q")
        return Capacitated(args.p, args.q)
    if v == "balanced":
        if args.delta is None:
            raise InstanceError("balanced needs --delta")
        return Balanced(args.delta)
    if v == "factor":
        if args.alpha is None:
            raise InstanceError("factor needs --alpha")
        return FactorBalanced(args.alpha)
    if v == "equal":
        return Equal()
    return Unconstrained()


def capacitated_solver(name: str, coloring: str = "perfect", trials=None, seed: int = 0, workers: int = 1):
    """A function Instance -> Clustering | None for Capacitated instances."""
    if name == "fpt":
        return lambda inst: fpt.solve(inst, coloring=coloring, trials=trials, seed=seed, workers=workers)
    if name == "brute-partition":
        return oracle.brute_force_partitions
    if name == "brute-medians":
        return lambda inst: oracle.brute_force_medians(inst, source="all")
    raise InstanceError(f"unknown solver {name!r}")


def run_solver(instance: Instance, name: str, coloring: str = "perfect", trials=None, seed: int = 0,
               workers: int = 1):
    if name == "brute-partition":
        # the partition oracle checks every variant's predicate natively
        return oracle.brute_force_partitions(instance)
    return variants.solve_variant(instance, capacitated_solver(name, coloring, trials, seed, workers))


def solve_with_kernel(instance: Instance, name: str, **kw):
    """Kernelize a Balanced instance, then solve what is left.  Returns (witness, info)."""
    res = kernel.kernelize_balanced(instance)
    if isinstance(res, kernel.Resolved):
        return res.witness, {"outcome": "resolved"}
    witness = run_solver(res.instance, name, **kw)
    info = {"outcome": "reduced", "n": res.instance.n, "sigma": res.instance.matrix.sigma,
            "column_bound": res.column_bound, "alphabet_bound": res.alphabet_bound}
    if witness is not None:
        # same column indices, distances unchanged by the relabelling
        witness = make_clustering(instance.matrix, witness.clusters)
    return witness, info


def make_report(instance: Instance, witness, solver: str, params: dict, elapsed_ms) -> dict:
    report = {
        "answer": "yes" if witness is not None else "no",
        "cost": None,
        "clusters": [],
        "medians": [],
        "solver": solver,
        "params": params,
        "elapsed_ms": elapsed_ms,
    }
    if witness is not None:
        order = sorted(range(len(witness.clusters)), key=lambda i: (not witness.clusters[i], witness.clusters[i]))
        report["cost"] = witness.cost
        report["clusters"] = [[j + 1 for j in sorted(witness.clusters[i])] for i in order]
        report["medians"] = [None if witness.medians[i] is None else list(witness.medians[i]) for i in order]
    return report


def verify_report(matrix: CategoricalMatrix, report: dict, constraint, k: int, B: int) -> None:
    """Raise AssertionError unless a yes-report is a genuine solution."""
    if report["answer"] != "yes":
        return
    clusters = [[j - 1 for j in c] for c in report["clusters"]]
    assert len(clusters) == k
    assert sorted(j for c in clusters for j in c) == list(range(matrix.n))
    recomputed = make_clustering(matrix, clusters)
    assert recomputed.cost == report["cost"] <= B
    assert check_constraint([len(c) for c in clusters], constraint, matrix.n)


def report_schema() -> dict:
    return json.loads(resources.files("catclust").joinpath("report_schema.json").read_text())


def dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def cmd_solve(args) -> int:
    matrix = read_instance(args.instance)
    constraint = build_constraint(args)
    instance = Instance(matrix, args.k, args.B, constraint)
    if args.kernelize and not isinstance(constraint, Balanced):
        raise InstanceError("--kernelize applies to the balanced variant only")
    params = {
        "variant": args.variant, "k": args.k, "B": args.B, "p": args.p, "q": args.q,
        "delta": args.delta, "alpha": None if args.alpha is None else str(args.alpha),
        "coloring": args.coloring, "trials": args.trials, "seed": args.seed,
        "kernelize": bool(args.kernelize),
    }
    kw = dict(coloring=args.coloring, trials=args.trials, seed=args.seed, workers=args.threads)
    start = time.perf_counter()
    if args.kernelize:
        witness, info = solve_with_kernel(instance, args.solver, **kw)
        params["kernel"] = info
    else:
        witness = run_solver(instance, args.solver, **kw)
    elapsed = round((time.perf_counter() - start) * 1000) if args.timing else None
    report = make_report(instance, witness, args.solver, params, elapsed)
    print(dump(report))
    return EXIT_YES if witness is not None else EXIT_NO


def plant(n: int, m: int, sigma: int, k: int, edits: int, seed: int):
    """Planted instance: k random centres, columns dealt round-robin after a
    shuffle, then ``edits`` distinct entries changed to a different symbol."""
    if k < 1 or k > n:
        raise InstanceError("planted_k must be in 1..n")
    if edits > m * n:
        raise InstanceError(f"at most m*n = {m * n} edits fit")
    if edits and sigma < 2:
        raise InstanceError("noise needs sigma >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = rng.integers(0, sigma, size=(k, m))
    labels = np.arange(n) % k
    rng.shuffle(labels)
    data = centers[labels].T.copy()  # m x n
    for cell in rng.choice(m * n, size=edits, replace=False):
        r, c = divmod(int(cell), n)
        data[r, c] = (data[r, c] + rng.integers(1, sigma)) % sigma
    matrix = CategoricalMatrix.from_rows(data.tolist(), sigma)
    truth = {
        "seed": seed, "planted_k": k, "noise_edits": edits, "B": edits,
        "centers": centers.tolist(),
        "clusters": [[j + 1 for j in range(n) if labels[j] == i] for i in range(k)],
    }
    return matrix, truth


def cmd_generate(args) -> int:
    matrix, truth = plant(args.n, args.m, args.sigma, args.planted_k, args.noise_edits, args.seed)
    out = Path(args.output)
    out.write_text(format_instance(matrix))
    sidecar = Path(args.truth) if args.truth else out.with_name(out.name + ".truth.json")
    sidecar.write_text(dump(truth) + "\n")
    return 0


# -- crosscheck -------------------------------------------------------------

CHECK_SOLVERS = ("fpt", "fpt-random", "brute-partition", "brute-medians", "brute-medians-M", "kernel-brute")


def _random_instance(rng: np.random.Generator, args) -> Instance:
    n = int(rng.integers(2, args.n_max + 1))
    m = int(rng.integers(1, args.m_max + 1))
    sigma = int(rng.integers(2, args.sigma_max + 1))
    k = int(rng.integers(1, min(args.k_max, n) + 1))
    B = int(rng.integers(0, args.B_max + 1))
    pool = rng.integers(0, sigma, size=(int(rng.integers(1, n + 1)), m))
    picks = rng.integers(0, len(pool), size=n)
    matrix = CategoricalMatrix([tuple(int(v) for v in pool[i]) for i in picks], sigma)
    v = args.variant
    if v == "capacitated":
        p = int(rng.integers(1, n // k + 1))
        c = Capacitated(p, int(rng.integers(p, n + 1)))
    elif v == "balanced":
        c = Balanced(int(rng.integers(0, 3)))
    elif v == "factor":
        c = FactorBalanced([Fraction(1), Fraction(3, 2), Fraction(2)][int(rng.integers(0, 3))])
    elif v == "equal":
        c = Equal()
    else:
        c = Unconstrained()
    return Instance(matrix, k, B, c)


def decide(name: str, instance: Instance, seed: int = 0) -> bool:
    if name == "fpt":
        return run_solver(instance, "fpt", coloring="exhaustive") is not None
    if name == "fpt-random":
        return run_solver(instance, "fpt", coloring="random", seed=seed) is not None
    if name == "brute-partition":
        return oracle.brute_force_partitions(instance) is not None
    if name == "brute-medians":
        return run_solver(instance, "brute-medians") is not None
    if name == "brute-medians-M":
        solver = lambda inst: oracle.brute_force_medians(inst, source="M")  # noqa: E731
        return variants.solve_variant(instance, solver) is not None
    if name == "kernel-brute":
        witness, _ = solve_with_kernel(instance, "brute-partition")
        return witness is not None
    raise InstanceError(f"unknown solver {name!r}")


def _check_one(job):
    index, instance, a, b, seed = job
    return index, decide(a, instance, seed), decide(b, instance, seed)


def cmd_crosscheck(args) -> int:
    a, b = args.solvers.split(",")
    for name in (a, b):
        if name not in CHECK_SOLVERS:
            raise InstanceError(f"unknown solver {name!r}; choose from {', '.join(CHECK_SOLVERS)}")
    if "kernel-brute" in (a, b) and args.variant != "balanced":
        raise InstanceError("kernel-brute needs --variant balanced")
    rng = np.random.Generator(np.random.PCG64(args.seed))
    jobs = [(i, _random_instance(rng, args), a, b, args.seed + i) for i in range(args.count)]
    if args.threads > 1:
        with ProcessPoolExecutor(args.threads) as ex:
            results = list(ex.map(_check_one, jobs))
    else:
        results = [_check_one(j) for j in jobs]
    disagreements = []
    for (i, da, db), (_, inst, *_rest) in zip(results, jobs):
        if da != db:
            disagreements.append({"index": i, a: da, b: db, "k": inst.k, "B": inst.B,
                                  "constraint": repr(inst.constraint),
                                  "instance": format_instance(inst.matrix)})
    print(dump({"solvers": [a, b], "variant": args.variant, "instances": len(jobs),
                "yes": sum(1 for _, da, _ in results if da), "disagreements": disagreements}))
    return EXIT_NO if disagreements else 0


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catclust", description="Size-constrained categorical clustering.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide an instance and print a JSON report")
    s.add_argument("instance", help="instance file, or - for stdin")
    s.add_argument("--variant", choices=VARIANTS, default="capacitated")
    s.add_argument("-k", type=int, required=True)
    s.add_argument("-B", type=int, required=True)
    s.add_argument("-p", type=int)
    s.add_argument("-q", type=int)
    s.add_argument("--delta", type=int)
    s.add_argument("--alpha", type=parse_alpha, help="ratio as NUM/DEN")
    s.add_argument("--solver", choices=SOLVERS, default="fpt")
    s.add_argument("--coloring", choices=("exhaustive", "perfect", "random"), default="perfect")
    s.add_argument("--trials", type=int, help="random colorings per l (default ceil(e^l ln 4))")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--kernelize", action="store_true", help="balanced only: run the kernel first")
    s.add_argument("--timing", action="store_true",
                   help="fill elapsed_ms with the wall time (makes reports run-dependent)")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="write a planted instance and its ground truth")
    g.add_argument("-n", type=int, required=True)
    g.add_argument("-m", type=int, required=True)
    g.add_argument("--sigma", type=int, required=True)
    g.add_argument("--planted-k", type=int, required=True)
    g.add_argument("--noise-edits", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--truth", help="sidecar path (default OUTPUT.truth.json)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("crosscheck", help="compare two solvers on random instances")
    c.add_argument("--solvers", default="fpt,brute-partition", help=f"pair from {', '.join(CHECK_SOLVERS)}")
    c.add_argument("--variant", choices=VARIANTS, default="capacitated")
    c.add_argument("--count", type=int, default=100)
    c.add_argument("--n-max", type=int, default=8)
    c.add_argument("--m-max", type=int, default=3)
    c.add_argument("--sigma-max", type=int, default=3)
    c.add_argument("--k-max", type=int, default=3)
    c.add_argument("--B-max", type=int, default=4)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--threads", type=int, default=1)
    c.set_defaults(func=cmd_crosscheck)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, ResourceError, OSError) as exc:
        print(f"catclust: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
