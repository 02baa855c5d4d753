"""Core data model and evaluation engine.

Named groups of sequences are scored by metrics. Each metric sees its group
plus whatever representations (embeddings, property tables) it declared,
resolved through a shared cache so expensive embedding models run at most
once per sequence per process.
"""

from __future__ import annotations

import hashlib
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Literal, Mapping, Sequence

import numpy as np

Direction = Literal["maximize", "minimize"]
Arity = Literal["scalar", "mean-and-deviation"]

_REL_TOL = 1e-12


class EvaluationConfigError(Exception):
    """Configuration mistake that aborts a whole run (not a single cell)."""


# ---------------------------------------------------------------------------
# data model


@dataclass
class SequenceSet:
    """Named, ordered multiset of sequence strings.

    Duplicate strings stay distinct elements and input order is preserved, so
    index i refers to the same element in every row-aligned representation.
    """

    name: str
    sequences: list[str]
    alphabet: str | None = None
    allow_empty: bool = False

    def __post_init__(self) -> None:
        self.sequences = [str(s) for s in self.sequences]
        if not self.allow_empty:
            for i, s in enumerate(self.sequences):
                if not s:
                    raise ValueError(f"sequence {i} in '{self.name}' is empty")

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[str]:
        return iter(self.sequences)

    def __getitem__(self, i: int) -> str:
        return self.sequences[i]


@dataclass
class EmbeddingMatrix:
    """n x d real matrix row-aligned with a SequenceSet."""

    data: np.ndarray
    source_id: str = ""

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {self.data.shape}")
        if not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)
        if not np.isfinite(self.data).all():
            raise ValueError(f"embedding matrix '{self.source_id}' contains non-finite values")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


COLUMN_KINDS = ("real", "binary", "categorical", "vec")


@dataclass
class PropertyColumn:
    """One named, typed property column; values are row-aligned to a SequenceSet."""

    name: str
    kind: str
    values: object  # ndarray for real/binary/vec, list[str] for categorical

    def __post_init__(self) -> None:
        if self.kind not in COLUMN_KINDS:
            raise ValueError(f"column '{self.name}': unknown kind '{self.kind}'")
        if self.kind == "categorical":
            self.values = [str(v) for v in self.values]
            return
        arr = np.asarray(self.values, dtype=np.float64)
        if self.kind in ("real", "binary"):
            if arr.ndim != 1:
                raise ValueError(f"column '{self.name}': expected one value per row")
            if not np.isfinite(arr).all():
                raise ValueError(f"column '{self.name}' contains non-finite values")
            if self.kind == "binary" and not np.isin(arr, (0.0, 1.0)).all():
                bad = int(np.argmin(np.isin(arr, (0.0, 1.0))))
                raise ValueError(
                    f"column '{self.name}': binary value {arr[bad]} at row {bad} is not in {{0,1}}"
                )
        else:  # vec
            if arr.ndim != 2:
                raise ValueError(f"column '{self.name}': vector column must be 2-D with uniform width")
            if not np.isfinite(arr).all():
                raise ValueError(f"column '{self.name}' contains non-finite values")
        self.values = arr

    @property
    def rows(self) -> int:
        return len(self.values)

    @property
    def width(self) -> int:
        if self.kind == "vec":
            return self.values.shape[1]
        return 1


@dataclass
class PropertyTable:
    """Per-sequence named property values, row-aligned with a SequenceSet."""

    columns: list[PropertyColumn]
    source_id: str = ""

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate property column names")
        counts = {c.rows for c in self.columns}
        if len(counts) > 1:
            raise ValueError(f"property columns disagree on row count: {sorted(counts)}")

    @property
    def rows(self) -> int:
        if not self.columns:
            return 0
        return self.columns[0].rows

    def column(self, name: str) -> PropertyColumn:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(f"no property column '{name}' in table '{self.source_id}'")

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


def take_rows(rep, indices) -> "EmbeddingMatrix | PropertyTable":
    """Row-subset of a representation, preserving alignment with the given indices."""
    indices = np.asarray(indices, dtype=np.intp)
    if isinstance(rep, EmbeddingMatrix):
        return EmbeddingMatrix(rep.data[indices], source_id=rep.source_id)
    cols = []
    for c in rep.columns:
        if c.kind == "categorical":
            vals = [c.values[i] for i in indices]
        else:
            vals = c.values[indices]
        cols.append(PropertyColumn(c.name, c.kind, vals))
    return PropertyTable(cols, source_id=rep.source_id)


# ---------------------------------------------------------------------------
# metric contract


@dataclass
class MetricResult:
    """Outcome of one (group, metric) cell."""

    value: float | None
    deviation: float | None = None
    per_fold: list[float] | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.error is not None:
            return
        if self.value is None:
            raise ValueError("a non-error result needs a value")
        self.value = float(self.value)
        if self.deviation is not None:
            self.deviation = float(self.deviation)
            if self.deviation < 0:
                raise ValueError("deviation must be nonnegative")
        if self.per_fold is not None:
            self.per_fold = [float(v) for v in self.per_fold]
            mean = float(np.mean(self.per_fold))
            dev = float(np.std(self.per_fold, ddof=1)) if len(self.per_fold) > 1 else 0.0
            scale = max(1.0, abs(mean))
            if abs(self.value - mean) > _REL_TOL * scale:
                raise ValueError("value must equal the mean of per_fold values")
            if self.deviation is None or abs(self.deviation - dev) > _REL_TOL * max(1.0, dev):
                raise ValueError("deviation must equal the sample standard deviation of per_fold")

    @property
    def ok(self) -> bool:
        return self.error is None


ComputeFn = Callable[["SequenceSet", "EvalContext"], "MetricResult | float | tuple"]


@dataclass
class MetricSpec:
    """A named metric: direction, arity, parameters, and its compute function."""

    name: str
    direction: Direction
    compute: ComputeFn
    arity: Arity = "scalar"
    parameters: dict = field(default_factory=dict)
    required_representations: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricHeader:
    """Plain-data column descriptor kept in report tables."""

    name: str
    direction: Direction
    arity: Arity = "scalar"


def _coerce_result(raw) -> MetricResult:
    if isinstance(raw, MetricResult):
        return raw
    if isinstance(raw, tuple):
        mean, dev = raw
        return MetricResult(value=float(mean), deviation=float(dev))
    return MetricResult(value=float(raw))


# ---------------------------------------------------------------------------
# representation cache


class Cache:
    """Process-wide store of computed representation rows.

    Keys are (model_id, exact sequence string); a key is computed at most once
    per process, even under concurrent lookups, and repeated lookups return
    bit-identical rows. An optional on-disk layer (one .npy per key, keyed by
    content hash) persists rows across processes.
    """

    def __init__(self, models: Mapping[str, Callable] | None = None, cache_dir: str | None = None):
        self.models = dict(models) if models else {}
        self.cache_dir = cache_dir
        self.hit_count = 0
        self.miss_count = 0
        self.disk_hits = 0
        self._store: dict[tuple[str, str], np.ndarray] = {}
        self._inflight: dict[tuple[str, str], threading.Event] = {}
        self._lock = threading.Lock()

    def model(self, model_id: str) -> Callable[[list[str]], np.ndarray]:
        """Cached callable for a model registered at construction."""
        if model_id not in self.models:
            raise KeyError(f"no model '{model_id}' registered in cache")
        fn = self.models[model_id]
        return lambda sequences: self.get_or_compute(model_id, fn, sequences)

    def _disk_path(self, model_id: str, sequence: str) -> str:
        mdir = hashlib.sha1(model_id.encode()).hexdigest()[:16]
        key = hashlib.sha256(sequence.encode()).hexdigest()
        return os.path.join(self.cache_dir, mdir, key + ".npy")

    def get_or_compute(self, model_id: str, model: Callable, sequences: Sequence[str]) -> np.ndarray:
        """Rows for `sequences` in input order, invoking `model` only on misses.

        The model receives one batch holding each missing sequence once, in
        first-occurrence input order, and must return one row per batch entry.
        A wrong row count raises and leaves the cache untouched for the batch.
        """
        sequences = [str(s) for s in sequences]
        keys = [(model_id, s) for s in sequences]
        own: list[tuple[str, str]] = []
        wait_for: list[threading.Event] = []
        with self._lock:
            seen_in_batch: set[tuple[str, str]] = set()
            for k in keys:
                if k in self._store:
                    self.hit_count += 1
                    continue
                self.miss_count += 1
                if k in seen_in_batch:
                    continue
                if k in self._inflight:
                    wait_for.append(self._inflight[k])
                    continue
                if self.cache_dir is not None:
                    path = self._disk_path(*k)
                    if os.path.exists(path):
                        row = np.load(path)
                        row.setflags(write=False)
                        self._store[k] = row
                        self.disk_hits += 1
                        continue
                ev = threading.Event()
                self._inflight[k] = ev
                own.append(k)
                seen_in_batch.add(k)
        try:
            if own:
                batch = [k[1] for k in own]
                rows = np.asarray(model(batch))
                if rows.shape[0] != len(batch):
                    raise ValueError(
                        f"model '{model_id}' returned {rows.shape[0]} rows for a batch of {len(batch)}"
                    )
                with self._lock:
                    for k, row in zip(own, rows):
                        row = np.array(row)
                        row.setflags(write=False)
                        self._store[k] = row
                if self.cache_dir is not None:
                    for k, row in zip(own, rows):
                        path = self._disk_path(*k)
                        os.makedirs(os.path.dirname(path), exist_ok=True)
                        np.save(path, np.asarray(row))
        finally:
            with self._lock:
                for k in own:
                    self._inflight.pop(k, None).set()
        for ev in wait_for:
            ev.wait()
        with self._lock:
            missing = [k for k in keys if k not in self._store]
        if missing:
            raise RuntimeError(f"computation of {len(missing)} sequence(s) failed in another thread")
        return np.stack([self._store[k] for k in keys])


# ---------------------------------------------------------------------------
# evaluation context


class EvalContext:
    """Resolves representations for the group under evaluation."""

    def __init__(self, resolver, group: SequenceSet):
        self._resolver = resolver
        self.group = group

    def representation(self, rep_id: str):
        return self.representation_for(self.group, rep_id)

    def representation_for(self, seqs: SequenceSet, rep_id: str):
        if self._resolver is None:
            raise EvaluationConfigError(
                f"metric requires representation '{rep_id}' but no resolver was provided"
            )
        rep = self._resolver.resolve(seqs, rep_id)
        if rep.rows != len(seqs):
            raise ValueError(
                f"representation '{rep_id}' has {rep.rows} rows for group "
                f"'{seqs.name}' of size {len(seqs)}"
            )
        return rep


class _FoldContext(EvalContext):
    """Row-sliced view of a parent context for one fold of the group."""

    def __init__(self, parent: EvalContext, subgroup: SequenceSet, indices):
        self._parent = parent
        self.group = subgroup
        self._indices = np.asarray(indices, dtype=np.intp)

    def representation(self, rep_id: str):
        return take_rows(self._parent.representation(rep_id), self._indices)

    def representation_for(self, seqs: SequenceSet, rep_id: str):
        if seqs is self.group:
            return self.representation(rep_id)
        return self._parent.representation_for(seqs, rep_id)


# ---------------------------------------------------------------------------
# report table


@dataclass
class ReportTable:
    """Groups x metrics grid of results, in input order."""

    group_names: list[str]
    metrics: list[MetricHeader]
    cells: dict[tuple[str, str], MetricResult]

    def cell(self, group: str, metric: str) -> MetricResult:
        return self.cells[(group, metric)]

    def row(self, group: str) -> list[MetricResult]:
        return [self.cells[(group, m.name)] for m in self.metrics]

    @property
    def has_errors(self) -> bool:
        return any(not c.ok for c in self.cells.values())


@dataclass
class IterationSeries:
    """Ordered design iterations, each holding named groups of sequences."""

    iterations: list[tuple[int, dict[str, SequenceSet]]]

    def __post_init__(self) -> None:
        idx = [i for i, _ in self.iterations]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"iteration indices must be strictly increasing, got {idx}")


@dataclass
class TrajectoryTable:
    """Per-iteration report tables from an iterative evaluation."""

    entries: list[tuple[int, ReportTable]]

    @property
    def iteration_indices(self) -> list[int]:
        return [i for i, _ in self.entries]


# ---------------------------------------------------------------------------
# engine


def _coerce_groups(groups) -> dict[str, SequenceSet]:
    out: dict[str, SequenceSet] = {}
    for name, value in groups.items():
        if isinstance(value, SequenceSet):
            if value.name != name:
                value = SequenceSet(name, list(value.sequences), value.alphabet, value.allow_empty)
            out[name] = value
        else:
            out[name] = SequenceSet(name, list(value))
    return out


def evaluate(
    groups: Mapping[str, SequenceSet | Sequence[str]],
    metrics: Sequence[MetricSpec],
    representations=None,
    jobs: int = 1,
) -> ReportTable:
    """Score every group with every metric.

    A failing metric yields an error cell for that group only; other cells
    are unaffected. Cell order is deterministic (input order). Duplicate
    metric names are a configuration error.

    Args:
        groups: mapping of group name to SequenceSet or plain list of strings.
        metrics: metric specifications, evaluated left to right.
        representations: resolver with a ``resolve(seqs, rep_id)`` method
            (e.g. :class:`seqeval.representations.Representations`).
        jobs: number of (group, metric) cells computed concurrently.
    """
    if not groups:
        raise EvaluationConfigError("no groups to evaluate")
    names = [m.name for m in metrics]
    for name in names:
        if names.count(name) > 1:
            raise EvaluationConfigError(f"duplicate metric name '{name}'")
    coerced = _coerce_groups(groups)

    def run_cell(gname: str, metric: MetricSpec) -> MetricResult:
        group = coerced[gname]
        ctx = EvalContext(representations, group)
        try:
            return _coerce_result(metric.compute(group, ctx))
        except Exception as exc:  # isolation: one bad cell never aborts the table
            return MetricResult(value=None, error=str(exc) or type(exc).__name__)

    cell_keys = [(g, m) for g in coerced for m in metrics]
    if jobs > 1 and len(cell_keys) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda gm: run_cell(*gm), cell_keys))
    else:
        results = [run_cell(g, m) for g, m in cell_keys]
    cells = {(g, m.name): r for (g, m), r in zip(cell_keys, results)}
    headers = [MetricHeader(m.name, m.direction, m.arity) for m in metrics]
    return ReportTable(list(coerced), headers, cells)


def fold_wrap(metric: MetricSpec, folds: int, seed: int) -> MetricSpec:
    """Resampling wrapper: compute `metric` on K disjoint folds of the group.

    The group is shuffled with a seeded permutation and split into K folds of
    size floor(n/K); the n mod K trailing elements of the shuffle are
    discarded. The wrapped result carries per-fold values, their mean, and
    their sample standard deviation.
    """
    if folds < 2:
        raise EvaluationConfigError(f"fold count must be at least 2, got {folds}")

    def compute(group: SequenceSet, ctx: EvalContext) -> MetricResult:
        n = len(group)
        if n < folds:
            raise ValueError(f"group '{group.name}' has {n} sequences, fewer than {folds} folds")
        order = np.random.default_rng(seed).permutation(n)
        size = n // folds
        values: list[float] = []
        for f in range(folds):
            idx = order[f * size : (f + 1) * size]
            sub = SequenceSet(group.name, [group.sequences[i] for i in idx], group.alphabet, group.allow_empty)
            res = _coerce_result(metric.compute(sub, _FoldContext(ctx, sub, idx)))
            if not res.ok:
                raise ValueError(f"fold {f}: {res.error}")
            values.append(res.value)
        if all(v == values[0] for v in values):
            # keep a constant metric exactly constant across the aggregation
            mean, dev = values[0], 0.0
        else:
            mean = float(np.mean(values))
            dev = float(np.std(values, ddof=1))
        return MetricResult(value=mean, deviation=dev, per_fold=values)

    params = dict(metric.parameters)
    params["fold_count"] = folds
    params["fold_seed"] = seed
    return MetricSpec(
        name=metric.name,
        direction=metric.direction,
        compute=compute,
        arity="mean-and-deviation",
        parameters=params,
        required_representations=metric.required_representations,
    )


def evaluate_iterations(
    series: IterationSeries,
    metrics: Sequence[MetricSpec],
    representations=None,
    jobs: int = 1,
) -> TrajectoryTable:
    """Evaluate each iteration's groups with a shared representation cache."""
    entries = [
        (index, evaluate(groups, metrics, representations, jobs))
        for index, groups in series.iterations
    ]
    return TrajectoryTable(entries)
