"""bench-cli: learn, evaluate, sample, and benchmark probabilistic circuits.

Commands: learn, grid, eval, sample, synthetic-quality, toy-example,
validate-model.  Results are tab-separated with a fixed column order;
exit codes: 0 ok, 2 usage, 3 data error, 4 internal.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import datasets, learner, toy
from .circuit import Circuit, InvalidCircuitError, ModelParseError
from .datasets import DataError
from .learner import Hyperparams, WeightedDataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

P_GRID = (0.01, 0.001, 0.0001)
ALPHA_GRID = (0.1, 0.01, 1e-6)
CLUSTERERS = ("em", "kmeans")

RESULTS_SCHEMA = "# softpc-results v1"
RESULT_COLUMNS = (
    "dataset",
    "method",
    "clusterer",
    "p",
    "alpha",
    "ll_valid_mean",
    "ll_test_mean",
    "ll_test_std",
    "nodes",
    "seconds",
)


class UsageError(ValueError):
    pass


def load_bundle(name: str, data_dir, seed: int) -> datasets.DatasetBundle:
    data_dir = Path(data_dir)
    if (data_dir / f"{name}.train.data").exists():
        return datasets.load_discrete(name, data_dir)
    if (data_dir / f"{name}.csv").exists():
        sidecar = data_dir / f"{name}.schema"
        if not sidecar.exists():
            raise DataError(f"mixed dataset {name!r} needs a sidecar schema file {sidecar}")
        return datasets.load_mixed_csv(data_dir / f"{name}.csv", sidecar, seed=seed, name=name)
    raise UsageError(f"unknown dataset {name!r} (no files under {data_dir})")


def _make_hp(args, p=None, alpha=None, clusterer=None, seed=None) -> Hyperparams:
    return Hyperparams(
        p_threshold=args.p if p is None else p,
        alpha=args.alpha if alpha is None else alpha,
        beta=args.beta,
        n_clusters=args.clusters,
        min_instances=args.min_instances,
        max_cluster_iters=args.max_cluster_iters,
        clusterer=(clusterer or args.clusterer),
        seed=args.seed if seed is None else seed,
    )


def _train(bundle, method: str, hp: Hyperparams):
    data = WeightedDataset(bundle.train, None, bundle.schema)
    fn = learner.soft_learn if method == "softlearn" else learner.learn_spn
    t0 = time.perf_counter()
    circuit, trace = fn(data, hp)
    seconds = time.perf_counter() - t0
    return circuit, trace, seconds


def _mean_ll(circuit: Circuit, matrix) -> float:
    return float(np.mean(circuit.log_density(matrix)))


def _run_cell(bundle, method, clusterer, p, alpha, seed, args):
    hp = _make_hp(args, p=p, alpha=alpha, clusterer=clusterer, seed=seed)
    circuit, _, seconds = _train(bundle, method, hp)
    return {
        "ll_valid": _mean_ll(circuit, bundle.valid),
        "ll_test": _mean_ll(circuit, bundle.test),
        "nodes": circuit.n_nodes,
        "seconds": seconds,
        "circuit": circuit,
    }


def _fmt_row(values) -> str:
    out = []
    for v in values:
        if isinstance(v, float):
            out.append(f"{v:.6g}")
        else:
            out.append(str(v))
    return "\t".join(out)


# ----------------------------------------------------------------------
# commands


def cmd_learn(args) -> int:
    bundle = load_bundle(args.data, args.data_dir, args.seed)
    result = _run_cell(bundle, args.method, args.clusterer, args.p, args.alpha, args.seed, args)
    if args.out_model:
        Path(args.out_model).write_text(result["circuit"].to_json())
    print("\t".join(RESULT_COLUMNS))
    print(
        _fmt_row(
            (
                args.data,
                args.method,
                args.clusterer,
                args.p,
                args.alpha,
                result["ll_valid"],
                result["ll_test"],
                0.0,
                result["nodes"],
                result["seconds"],
            )
        )
    )
    return EXIT_OK


def _read_existing_results(path: Path):
    keys = set()
    lines = []
    if not path.exists():
        return keys, lines
    text = path.read_text().splitlines()
    for line in text:
        if line.startswith("#") or line.startswith(RESULT_COLUMNS[0] + "\t"):
            continue
        if not line.strip():
            continue
        parts = line.split("\t")
        keys.add(tuple(parts[:5]))
        lines.append(line)
    return keys, lines


def cmd_grid(args) -> int:
    bundle = load_bundle(args.data, args.data_dir, args.seed)
    clusterers = [args.clusterer] if args.clusterer else list(CLUSTERERS)
    ps = [args.p] if args.p is not None else list(P_GRID)
    alphas = [args.alpha] if args.alpha is not None else list(ALPHA_GRID)
    cells = [(c, p, a) for c in clusterers for p in ps for a in alphas]

    out_path = Path(args.out) if args.out else None
    existing_keys, existing_lines = (set(), [])
    if out_path:
        existing_keys, existing_lines = _read_existing_results(out_path)

    def key_of(cell):
        c, p, a = cell
        return (args.data, args.method, c, f"{p:.6g}", f"{a:.6g}")

    todo = [cell for cell in cells if args.force or key_of(cell) not in existing_keys]

    tasks = [
        (ci, rep, cell)
        for ci, cell in enumerate(todo)
        for rep in range(args.reps)
    ]
    results = {}

    def run(task):
        ci, rep, (c, p, a) = task
        # each (cell, repetition) owns its own seed stream
        return ci, rep, _run_cell(bundle, args.method, c, p, a, args.seed + rep, args)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for ci, rep, res in pool.map(run, tasks):
                results[(ci, rep)] = res
    else:
        for task in tasks:
            ci, rep, res = run(task)
            results[(ci, rep)] = res

    rows = []
    for ci, (c, p, a) in enumerate(todo):
        cell_res = [results[(ci, rep)] for rep in range(args.reps)]
        tests = np.array([r["ll_test"] for r in cell_res])
        valids = np.array([r["ll_valid"] for r in cell_res])
        rows.append(
            (
                args.data,
                args.method,
                c,
                p,
                a,
                float(valids.mean()),
                float(tests.mean()),
                float(tests.std()),
                int(np.mean([r["nodes"] for r in cell_res])),
                float(np.sum([r["seconds"] for r in cell_res])),
            )
        )

    header = "\t".join(RESULT_COLUMNS)
    body = existing_lines + [_fmt_row(r) for r in rows]
    table = "\n".join([RESULTS_SCHEMA, header] + body) + "\n"
    if out_path:
        out_path.write_text(table)
        plot_path = out_path.with_suffix(out_path.suffix + ".plot.tsv")
        plot_lines = ["x\ty\tseries"]
        for r in rows:
            plot_lines.append(f"p={r[3]:.6g},alpha={r[4]:.6g}\t{r[6]:.6g}\t{r[2]}")
        plot_path.write_text("\n".join(plot_lines) + "\n")
    print(table, end="")

    if rows:
        best = max(rows, key=lambda r: r[5])  # selected on validation LL
        print(f"# best by validation LL: clusterer={best[2]} p={best[3]:g} "
              f"alpha={best[4]:g} ll_test_mean={best[6]:.6g}")
    return EXIT_OK


def cmd_eval(args) -> int:
    circuit = Circuit.from_json(Path(args.model).read_text())
    bundle = load_bundle(args.data, args.data_dir, args.seed)
    print("split\tll_mean")
    for split in ("train", "valid", "test"):
        print(f"{split}\t{_mean_ll(circuit, getattr(bundle, split)):.6g}")
    return EXIT_OK


def cmd_sample(args) -> int:
    circuit = Circuit.from_json(Path(args.model).read_text())
    rng = np.random.default_rng(args.seed)
    rows = circuit.sample(rng, args.n)
    lines = []
    for row in rows:
        fields = []
        for v, var in zip(row, circuit.schema):
            fields.append(str(int(v)) if var.kind == "cat" else repr(float(v)))
        lines.append(",".join(fields))
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_synthetic_quality(args) -> int:
    bundle = load_bundle(args.data, args.data_dir, args.seed)
    originals, synthetics = [], []
    for rep in range(args.reps):
        seed = args.seed + rep
        hp = _make_hp(args, seed=seed)
        circuit1, _, _ = _train(bundle, args.method, hp)
        rng = np.random.default_rng(seed)
        synthetic = circuit1.sample(rng, bundle.train.shape[0])
        if all(v.kind == "cat" for v in bundle.schema):
            synthetic = np.rint(synthetic)
        data2 = WeightedDataset(synthetic, None, bundle.schema)
        fn = learner.soft_learn if args.method == "softlearn" else learner.learn_spn
        circuit2, _ = fn(data2, hp)
        originals.append(_mean_ll(circuit1, bundle.test))
        synthetics.append(_mean_ll(circuit2, bundle.test))
    orig, synth = float(np.mean(originals)), float(np.mean(synthetics))
    print("dataset\tmethod\tll_original\tll_synthetic\tdrop\treps")
    print(_fmt_row((args.data, args.method, orig, synth, orig - synth, args.reps)))
    return EXIT_OK


def cmd_toy_example(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    matrix = toy.generate(args.n, rng)

    leaf_lines = ["method\tvariable\tmu\tsigma"]
    point_lines = ["x\ty\tseries"]
    for x, y in matrix:
        point_lines.append(f"{x:.6g}\t{y:.6g}\tdata")
    for method in ("learnspn", "softlearn"):
        hp = learner.Hyperparams(
            p_threshold=0.001, clusterer=args.clusterer, seed=args.seed
        )
        result = toy.run_toy(args.n, args.adversarial, method, seed=args.seed, hp=hp)
        for var, leaves in ((0, result.x_leaves), (1, result.y_leaves)):
            for mu, sigma in leaves:
                leaf_lines.append(f"{method}\t{'xy'[var]}\t{mu:.6g}\t{sigma:.6g}")
        for (mx, _), (my, _) in zip(result.x_leaves, result.y_leaves):
            point_lines.append(f"{mx:.6g}\t{my:.6g}\t{method}_mean")

    (out_dir / "leaf_params.tsv").write_text("\n".join(leaf_lines) + "\n")
    (out_dir / "points.tsv").write_text("\n".join(point_lines) + "\n")
    print(f"wrote {out_dir / 'leaf_params.tsv'} and {out_dir / 'points.tsv'}")
    return EXIT_OK


def cmd_validate_model(args) -> int:
    try:
        circuit = Circuit.from_json(Path(args.model).read_text(), check=False)
    except ModelParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    violations = circuit.validate()
    if violations:
        for v in violations:
            print(v)
        return EXIT_DATA
    print("valid")
    return EXIT_OK


# ----------------------------------------------------------------------
# parser


def _add_common_hp(sp, grid=False):
    sp.add_argument("--p", type=float, default=None if grid else 0.01,
                    help="chi-square significance threshold")
    sp.add_argument("--alpha", type=float, default=None if grid else 0.01,
                    help="Laplace smoothing pseudo-count")
    sp.add_argument("--beta", type=float, default=4.0, help="softmax sharpness (k-means)")
    sp.add_argument("--clusters", type=int, default=2, help="children per sum node")
    sp.add_argument("--min-instances", type=float, default=50.0,
                    help="stop clustering below this effective sample size")
    sp.add_argument("--max-cluster-iters", type=int, default=100,
                    help="iteration cap inside clustering (2 = early-stop mode)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench-cli",
        description="Learn and evaluate probabilistic circuits on tabular benchmarks.",
    )
    parser.add_argument("--data-dir", default="datasets", help="dataset directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", default=None, help="results table path")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("learn", help="train one circuit and report likelihoods")
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=("learnspn", "softlearn"), required=True)
    sp.add_argument("--clusterer", choices=CLUSTERERS, default="em")
    _add_common_hp(sp)
    sp.add_argument("--out-model", default=None)
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("grid", help="hyperparameter grid with repetitions")
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=("learnspn", "softlearn"), required=True)
    sp.add_argument("--clusterer", choices=CLUSTERERS, default=None,
                    help="restrict to one clusterer (default: both)")
    _add_common_hp(sp, grid=True)
    sp.add_argument("--reps", type=int, default=9)
    sp.add_argument("--force", action="store_true",
                    help="recompute cells already present in the results file")
    sp.set_defaults(func=cmd_grid)

    sp = sub.add_parser("eval", help="evaluate a model file on a dataset")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sample", help="draw samples from a model file")
    sp.add_argument("--model", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", dest="out", default=None)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("synthetic-quality",
                        help="train, sample, retrain on the samples, compare test LL")
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=("learnspn", "softlearn"), required=True)
    sp.add_argument("--clusterer", choices=CLUSTERERS, default="em")
    _add_common_hp(sp)
    sp.add_argument("--reps", type=int, default=3)
    sp.set_defaults(func=cmd_synthetic_quality)

    sp = sub.add_parser("toy-example", help="reproduce the bad-split toy experiment")
    sp.add_argument("--n", type=int, default=1000, help="points per mixture component")
    sp.add_argument("--adversarial", action="store_true")
    sp.add_argument("--clusterer", choices=CLUSTERERS, default="em")
    sp.add_argument("--out-dir", default="toy-out")
    sp.set_defaults(func=cmd_toy_example)

    sp = sub.add_parser("validate-model", help="check a model file's structural validity")
    sp.add_argument("--model", required=True)
    sp.set_defaults(func=cmd_validate_model)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelParseError, InvalidCircuitError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
