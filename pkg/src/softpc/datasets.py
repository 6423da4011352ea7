"""Benchmark dataset ingestion: discrete .data triples and mixed CSV files.

Discrete benchmarks use the de-facto plain-text format of the twenty
density-estimation datasets: comma-separated nonnegative integers, one row
per line, no header, split across ``<name>.train.data``,
``<name>.valid.data``, ``<name>.test.data``.  A manifest of the expected
(vars, train, valid, test) statistics ships with the package and can be
checked against loaded data.

Mixed datasets are a CSV with a header plus a sidecar schema file, since
the CSV alone cannot distinguish integer-coded categoricals from counts.
Sidecar format: one ``<column> cat`` or ``<column> cont`` entry per line;
``#`` starts a comment.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .schema import Schema, Variable


class DataError(ValueError):
    """Raised for malformed or missing dataset inputs."""


@dataclass
class DatasetBundle:
    name: str
    schema: Schema
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray


def load_manifest(path=None) -> dict:
    """Read the Table-of-expected-statistics manifest.

    Returns ``{name: (vars, train, valid, test)}``.  Without ``path`` the
    manifest bundled with the package is used.
    """
    if path is None:
        text = resources.files("softpc").joinpath("table6_manifest.tsv").read_text()
    else:
        text = Path(path).read_text()
    out = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for ln in lines[1:]:
        name, nv, ntr, nva, nte = ln.split("\t")
        out[name] = (int(nv), int(ntr), int(nva), int(nte))
    return out


DISCRETE_MANIFEST = load_manifest()


def _read_discrete_file(path: Path):
    if not path.exists():
        raise DataError(f"missing dataset file: {path}")
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [int(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-integer token") from exc
            if any(v < 0 for v in row):
                raise DataError(f"{path}:{lineno}: negative value")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}:{lineno}: ragged row (got {len(row)} values, expected {width})"
                )
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty file")
    return np.asarray(rows, dtype=float)


def load_discrete(name: str, data_dir) -> DatasetBundle:
    """Load ``<dir>/<name>.{train,valid,test}.data`` as a categorical bundle.

    Per-column arity is 1 + the maximum value across all three splits
    (at least 2).
    """
    data_dir = Path(data_dir)
    splits = {
        part: _read_discrete_file(data_dir / f"{name}.{part}.data")
        for part in ("train", "valid", "test")
    }
    widths = {m.shape[1] for m in splits.values()}
    if len(widths) != 1:
        raise DataError(f"{name}: splits disagree on variable count: {sorted(widths)}")
    maxes = np.max([m.max(axis=0) for m in splits.values()], axis=0)
    arities = np.maximum(maxes.astype(int) + 1, 2)
    schema = Schema.categorical(arities)
    return DatasetBundle(name, schema, splits["train"], splits["valid"], splits["test"])


def check_manifest(bundle: DatasetBundle, manifest=None):
    """Compare a loaded bundle against the expected Table statistics.

    Returns a list of mismatch messages (empty when everything matches or
    the dataset is not listed).
    """
    manifest = DISCRETE_MANIFEST if manifest is None else manifest
    expected = manifest.get(bundle.name)
    if expected is None:
        return []
    actual = (
        len(bundle.schema),
        bundle.train.shape[0],
        bundle.valid.shape[0],
        bundle.test.shape[0],
    )
    if actual != expected:
        return [f"{bundle.name}: expected (vars, train, valid, test)={expected}, got {actual}"]
    return []


def read_schema_spec(path) -> dict:
    """Parse a sidecar schema file into ``{column_name: 'cat' | 'cont'}``."""
    spec = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("cat", "cont"):
            raise DataError(f"{path}:{lineno}: expected '<column> cat|cont'")
        spec[parts[0]] = parts[1]
    if not spec:
        raise DataError(f"{path}: empty schema spec")
    return spec


def load_mixed_csv(
    csv_path,
    schema_spec,
    fractions=(0.7, 0.1, 0.2),
    seed: int = 0,
    name: str = None,
    allow_unseen: bool = False,
) -> DatasetBundle:
    """Load a mixed categorical/continuous CSV with a header row.

    ``schema_spec`` maps column names to ``"cat"``/``"cont"`` (a path to a
    sidecar file is also accepted).  Rows are shuffled with a seeded RNG
    and split by ``fractions`` (train/valid/test).  Categorical levels are
    dictionary-encoded in first-appearance order over the training split;
    levels appearing only in valid/test map to a reserved extra level when
    ``allow_unseen`` is set and raise otherwise.
    """
    csv_path = Path(csv_path)
    if isinstance(schema_spec, (str, Path)):
        schema_spec = read_schema_spec(schema_spec)
    if abs(sum(fractions) - 1.0) > 1e-9 or len(fractions) != 3:
        raise DataError("fractions must be three values summing to 1")

    if not csv_path.exists():
        raise DataError(f"missing dataset file: {csv_path}")
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{csv_path}: empty file") from None
        raw_rows = [row for row in reader if row]
    if not raw_rows:
        raise DataError(f"{csv_path}: no data rows")

    missing = [c for c in header if c not in schema_spec]
    if missing:
        raise DataError(f"schema spec missing columns: {missing}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(raw_rows))
    n = len(raw_rows)
    n_train = int(round(fractions[0] * n))
    n_valid = int(round(fractions[1] * n))
    idx_train = order[:n_train]
    idx_valid = order[n_train : n_train + n_valid]
    idx_test = order[n_train + n_valid :]

    cols = list(zip(*raw_rows))
    encoded = np.empty((n, len(header)))
    variables = []
    for j, colname in enumerate(header):
        kind = schema_spec[colname]
        raw = cols[j]
        if kind == "cont":
            try:
                encoded[:, j] = [float(v) for v in raw]
            except ValueError as exc:
                raise DataError(f"{csv_path}: column {colname!r}: non-numeric value") from exc
            variables.append(Variable("cont", name=colname))
        else:
            levels = {}
            for i in idx_train:  # first-appearance order over the training split
                levels.setdefault(raw[i], len(levels))
            reserved = None
            codes = np.empty(n)
            for i in range(n):
                code = levels.get(raw[i])
                if code is None:
                    if not allow_unseen:
                        raise DataError(
                            f"{csv_path}: column {colname!r}: level {raw[i]!r} "
                            "absent from the training split"
                        )
                    if reserved is None:
                        reserved = len(levels)
                    code = reserved
                codes[i] = code
            arity = len(levels) + (1 if reserved is not None else 0)
            variables.append(Variable("cat", max(arity, 2), name=colname))
            encoded[:, j] = codes

    schema = Schema(variables)
    return DatasetBundle(
        name or csv_path.stem,
        schema,
        encoded[idx_train],
        encoded[idx_valid],
        encoded[idx_test],
    )


def standardize(matrix, schema, weights=None):
    """Weighted zero-mean/unit-std transform of continuous columns.

    Returns ``(transformed, means, stds)``; categorical columns pass
    through with mean 0 / std 1 recorded, as do zero-variance columns.
    ``inverse_standardize`` undoes the transform.
    """
    matrix = np.asarray(matrix, dtype=float).copy()
    n = matrix.shape[0]
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    total = weights.sum()
    means = np.zeros(matrix.shape[1])
    stds = np.ones(matrix.shape[1])
    for j in range(matrix.shape[1]):
        if schema.is_cat(j):
            continue
        mean = float(np.dot(weights, matrix[:, j]) / total)
        var = float(np.dot(weights, (matrix[:, j] - mean) ** 2) / total)
        if var > 0:
            means[j] = mean
            stds[j] = np.sqrt(var)
            matrix[:, j] = (matrix[:, j] - mean) / stds[j]
    return matrix, means, stds


def inverse_standardize(matrix, schema, means, stds):
    matrix = np.asarray(matrix, dtype=float).copy()
    for j in range(matrix.shape[1]):
        if not schema.is_cat(j):
            matrix[:, j] = matrix[:, j] * stds[j] + means[j]
    return matrix
