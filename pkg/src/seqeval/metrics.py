"""Ready-made metric specifications.

Each builder wires one computation to the evaluation engine: it fixes the
display name and direction, captures parameters, and knows how to pull the
representations it needs (embeddings by representation id or by direct
callable, properties by column name) for both the evaluated group and the
reference set.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import embed_metrics, prop_metrics, seq_metrics
from .core import (
    EmbeddingMatrix,
    EvalContext,
    EvaluationConfigError,
    MetricResult,
    MetricSpec,
    PropertyTable,
    SequenceSet,
    fold_wrap,
)
from .embed_metrics import FkeaParams, KernelSpec
from .prop_metrics import ConformityParams, HypervolumeParams, KdeParams
from .seq_metrics import DiversityParams, NgramParams

Embedder = Callable[[list[str]], np.ndarray]


# ---------------------------------------------------------------------------
# representation plumbing


def _check_embedding_source(embedding: str | None, embedder: Embedder | None) -> None:
    if (embedding is None) == (embedder is None):
        raise EvaluationConfigError(
            "pass exactly one of embedding (a representation id) or embedder (a callable)"
        )


def _embed_group(group: SequenceSet, ctx: EvalContext, embedding: str | None, embedder: Embedder | None) -> np.ndarray:
    if embedding is not None:
        rep = ctx.representation(embedding)
        if not isinstance(rep, EmbeddingMatrix):
            raise ValueError(f"representation '{embedding}' is not an embedding")
        return rep.data
    rows = np.asarray(embedder(list(group.sequences)), dtype=np.float64)
    if rows.shape[0] != len(group):
        raise ValueError(f"embedder returned {rows.shape[0]} rows for {len(group)} sequences")
    return rows


def _embed_reference(reference, ctx: EvalContext, embedding: str | None, embedder: Embedder | None) -> np.ndarray:
    if isinstance(reference, EmbeddingMatrix):
        return reference.data
    if isinstance(reference, np.ndarray):
        return np.atleast_2d(np.asarray(reference, dtype=np.float64))
    if not isinstance(reference, SequenceSet):
        raise ValueError("reference must be a SequenceSet, EmbeddingMatrix, or array")
    if embedding is not None:
        rep = ctx.representation_for(reference, embedding)
        if not isinstance(rep, EmbeddingMatrix):
            raise ValueError(f"representation '{embedding}' is not an embedding")
        return rep.data
    rows = np.asarray(embedder(list(reference.sequences)), dtype=np.float64)
    if rows.shape[0] != len(reference):
        raise ValueError(f"embedder returned {rows.shape[0]} rows for {len(reference)} sequences")
    return rows


def _require_reference_set(reference, metric: str) -> SequenceSet:
    if not isinstance(reference, SequenceSet):
        raise EvaluationConfigError(f"{metric} needs a reference SequenceSet")
    return reference


def _property_table(source, ctx: EvalContext, properties: str | None) -> PropertyTable:
    if isinstance(source, PropertyTable):
        return source
    if not isinstance(source, SequenceSet):
        raise ValueError("property source must be a SequenceSet or PropertyTable")
    if properties is None:
        raise EvaluationConfigError("a property representation id is required")
    if source is ctx.group:
        rep = ctx.representation(properties)
    else:
        rep = ctx.representation_for(source, properties)
    if not isinstance(rep, PropertyTable):
        raise ValueError(f"representation '{properties}' is not a property table")
    return rep


def _column_1d(table: PropertyTable, column: str, kinds: tuple[str, ...]) -> np.ndarray:
    col = table.column(column)
    if col.kind not in kinds:
        raise ValueError(
            f"column '{column}' has kind '{col.kind}', expected one of {list(kinds)}"
        )
    return np.asarray(col.values, dtype=np.float64)


def _stack_columns(table: PropertyTable, columns: Sequence[str]) -> np.ndarray:
    if not columns:
        raise EvaluationConfigError("at least one property column is required")
    blocks = []
    for name in columns:
        col = table.column(name)
        if col.kind == "categorical":
            raise ValueError(f"column '{name}' is categorical and cannot enter a numeric stack")
        arr = np.asarray(col.values, dtype=np.float64)
        blocks.append(arr[:, None] if arr.ndim == 1 else arr)
    return np.hstack(blocks)


# ---------------------------------------------------------------------------
# sequence-space metrics


def novelty_metric(reference: SequenceSet, name: str = "Novelty") -> MetricSpec:
    """Fraction of the group's strings absent from the reference set."""
    ref = _require_reference_set(reference, "Novelty")

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        return seq_metrics.novelty(group, ref)

    return MetricSpec(name, "maximize", compute)


def uniqueness_metric(name: str = "Uniqueness") -> MetricSpec:
    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        return seq_metrics.uniqueness(group)

    return MetricSpec(name, "maximize", compute)


def diversity_metric(params: DiversityParams | None = None, name: str = "Diversity") -> MetricSpec:
    """Mean normalized edit distance between distinct group members."""
    params = params or DiversityParams()

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        return seq_metrics.diversity(group, params)

    return MetricSpec(name, "maximize", compute, parameters={"k": params.k, "seed": params.seed})


def ngram_metric(
    reference: SequenceSet,
    params: NgramParams | None = None,
    name: str = "N-gram",
) -> MetricSpec:
    """Mean Jaccard overlap of each member's N-grams with the reference profile."""
    params = params or NgramParams()
    ref = _require_reference_set(reference, "N-gram")

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        return seq_metrics.ngram_jaccard(group, ref, params)

    return MetricSpec(name, params.direction, compute, parameters={"N": params.N})


# ---------------------------------------------------------------------------
# embedding-space metrics


def fbd_metric(
    reference,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "FBD",
) -> MetricSpec:
    """Fréchet distance between Gaussian fits of group and reference embeddings."""
    _check_embedding_source(embedding, embedder)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        xg = _embed_group(group, ctx, embedding, embedder)
        xr = _embed_reference(reference, ctx, embedding, embedder)
        return embed_metrics.fbd(xg, xr)

    reps = (embedding,) if embedding else ()
    return MetricSpec(name, "minimize", compute, required_representations=reps)


def mmd_metric(
    reference,
    kernel: KernelSpec | None = None,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "MMD",
) -> MetricSpec:
    """Unbiased squared maximum mean discrepancy against the reference."""
    _check_embedding_source(embedding, embedder)
    kernel = kernel or KernelSpec()

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        xg = _embed_group(group, ctx, embedding, embedder)
        xr = _embed_reference(reference, ctx, embedding, embedder)
        return embed_metrics.mmd(xg, xr, kernel)

    reps = (embedding,) if embedding else ()
    return MetricSpec(
        name,
        "minimize",
        compute,
        parameters={"kernel": kernel.kind, "sigma": kernel.sigma, "alpha": kernel.alpha},
        required_representations=reps,
    )


def precision_metric(
    reference,
    k: int = 3,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "Precision",
) -> MetricSpec:
    """Fraction of group embeddings inside the reference k-NN manifold."""
    _check_embedding_source(embedding, embedder)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        xg = _embed_group(group, ctx, embedding, embedder)
        xr = _embed_reference(reference, ctx, embedding, embedder)
        return embed_metrics.improved_precision(xg, xr, k)

    reps = (embedding,) if embedding else ()
    return MetricSpec(name, "maximize", compute, parameters={"k": k}, required_representations=reps)


def recall_metric(
    reference,
    k: int = 3,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "Recall",
) -> MetricSpec:
    """Fraction of reference embeddings inside the group's k-NN manifold."""
    _check_embedding_source(embedding, embedder)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        xg = _embed_group(group, ctx, embedding, embedder)
        xr = _embed_reference(reference, ctx, embedding, embedder)
        return embed_metrics.improved_recall(xg, xr, k)

    reps = (embedding,) if embedding else ()
    return MetricSpec(name, "maximize", compute, parameters={"k": k}, required_representations=reps)


def authenticity_metric(
    reference,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "Authenticity",
) -> MetricSpec:
    """Fraction of group embeddings not plausibly copied from the reference."""
    _check_embedding_source(embedding, embedder)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        xg = _embed_group(group, ctx, embedding, embedder)
        xr = _embed_reference(reference, ctx, embedding, embedder)
        return embed_metrics.authenticity(xg, xr)

    reps = (embedding,) if embedding else ()
    return MetricSpec(name, "maximize", compute, required_representations=reps)


def vendi_metric(
    kernel: KernelSpec | None = None,
    alpha: float = 1.0,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "Vendi",
) -> MetricSpec:
    """Effective number of distinct members under a similarity kernel."""
    _check_embedding_source(embedding, embedder)
    kernel = kernel or KernelSpec()

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        x = _embed_group(group, ctx, embedding, embedder)
        return embed_metrics.vendi_exact(x, kernel, alpha)

    reps = (embedding,) if embedding else ()
    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={"kernel": kernel.kind, "sigma": kernel.sigma, "alpha": alpha},
        required_representations=reps,
    )


def vendi_fkea_metric(
    params: FkeaParams | None = None,
    embedding: str | None = None,
    embedder: Embedder | None = None,
    name: str = "Vendi (FKEA)",
) -> MetricSpec:
    """Random-features approximation of the Vendi score for large groups."""
    _check_embedding_source(embedding, embedder)
    params = params or FkeaParams()

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        x = _embed_group(group, ctx, embedding, embedder)
        return embed_metrics.vendi_fkea(x, params)

    reps = (embedding,) if embedding else ()
    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={
            "num_features": params.num_features,
            "renyi_alpha": params.renyi_alpha,
            "seed": params.seed,
            "sigma": params.sigma,
        },
        required_representations=reps,
    )


# ---------------------------------------------------------------------------
# property-space metrics


def identity_metric(
    properties: str,
    column: str,
    name: str = "Identity",
    direction: str = "maximize",
) -> MetricSpec:
    """Mean of a property column, with its population spread as deviation."""

    def compute(group: SequenceSet, ctx: EvalContext) -> MetricResult:
        table = _property_table(group, ctx, properties)
        mean, var = prop_metrics.identity_stat(_column_1d(table, column, ("real", "binary")))
        return MetricResult(value=mean, deviation=float(np.sqrt(var)))

    return MetricSpec(
        name,
        direction,
        compute,
        arity="mean-and-deviation",
        parameters={"column": column},
        required_representations=(properties,),
    )


def threshold_metric(
    properties: str,
    column: str,
    tau: float,
    side: str = "above",
    name: str = "Threshold",
) -> MetricSpec:
    """Fraction of the group strictly beyond a property threshold."""

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        table = _property_table(group, ctx, properties)
        return prop_metrics.threshold_fraction(
            _column_1d(table, column, ("real", "binary")), tau, side
        )

    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={"column": column, "tau": tau, "side": side},
        required_representations=(properties,),
    )


def hit_rate_metric(properties: str, column: str, name: str = "Hit-rate") -> MetricSpec:
    """Mean of a binary success column."""

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        table = _property_table(group, ctx, properties)
        return prop_metrics.hit_rate(_column_1d(table, column, ("binary", "real")))

    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={"column": column},
        required_representations=(properties,),
    )


def hypervolume_metric(
    properties: str,
    columns: Sequence[str],
    params: HypervolumeParams | None = None,
    name: str = "Hypervolume",
) -> MetricSpec:
    """Dominated-region volume (or hull volume) over objective columns."""
    params = params or HypervolumeParams()
    columns = list(columns)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        table = _property_table(group, ctx, properties)
        return prop_metrics.property_volume(_stack_columns(table, columns), params)

    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={"columns": columns, "mode": params.mode},
        required_representations=(properties,),
    )


def conformity_metric(
    reference,
    properties: str,
    columns: str | Sequence[str],
    params: ConformityParams | None = None,
    name: str = "Conformity",
) -> MetricSpec:
    """How typical the group's property values are of the reference's."""
    params = params or ConformityParams()
    cols = [columns] if isinstance(columns, str) else list(columns)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        table = _property_table(group, ctx, properties)
        ref_table = _property_table(reference, ctx, properties)
        return prop_metrics.conformity_score(
            _stack_columns(table, cols), _stack_columns(ref_table, cols), params
        )

    return MetricSpec(
        name,
        "maximize",
        compute,
        parameters={"columns": cols, "folds": params.folds, "seed": params.seed},
        required_representations=(properties,),
    )


def kl_metric(
    reference,
    properties: str,
    columns: str | Sequence[str],
    params: KdeParams | None = None,
    name: str = "KL",
) -> MetricSpec:
    """KL divergence of the group's property distribution from the reference's.

    A single categorical column uses the exact smoothed discrete form;
    numeric columns use kernel density fits with Monte Carlo integration.
    """
    params = params or KdeParams()
    cols = [columns] if isinstance(columns, str) else list(columns)

    def compute(group: SequenceSet, ctx: EvalContext) -> float:
        table = _property_table(group, ctx, properties)
        ref_table = _property_table(reference, ctx, properties)
        if len(cols) == 1 and table.column(cols[0]).kind == "categorical":
            return prop_metrics.kl_divergence_categorical(
                table.column(cols[0]).values, ref_table.column(cols[0]).values
            )
        return prop_metrics.kl_divergence_continuous(
            _stack_columns(table, cols), _stack_columns(ref_table, cols), params
        )

    return MetricSpec(
        name,
        "minimize",
        compute,
        parameters={"columns": cols, "mc_samples": params.mc_samples, "seed": params.seed},
        required_representations=(properties,),
    )


# ---------------------------------------------------------------------------
# config-driven construction

_NEEDS_REFERENCE = {
    "novelty", "ngram", "fbd", "mmd", "precision", "recall", "authenticity", "conformity", "kl",
}
METRIC_NAMES = (
    "novelty", "uniqueness", "diversity", "ngram", "fbd", "mmd", "precision", "recall",
    "authenticity", "vendi", "vendi-fkea", "identity", "threshold", "hit-rate",
    "hypervolume", "conformity", "kl",
)


def _kernel_from_params(p: dict, where: str) -> KernelSpec:
    kcfg = p.get("kernel", {})
    if isinstance(kcfg, str):
        kcfg = {"kind": kcfg}
    if not isinstance(kcfg, dict):
        raise EvaluationConfigError(f"{where}.parameters.kernel must be an object or kind string")
    try:
        return KernelSpec(
            kind=kcfg.get("kind", "gaussian-rbf"),
            sigma=kcfg.get("sigma", "median-heuristic"),
            alpha=kcfg.get("alpha", 1.0),
        )
    except ValueError as exc:
        raise EvaluationConfigError(f"{where}.parameters.kernel: {exc}") from None


def metric_from_entry(
    entry: dict,
    reference: SequenceSet | None,
    where: str,
    default_seed: int = 0,
) -> MetricSpec:
    """Build one metric from a run-config entry.

    Raises EvaluationConfigError naming the offending key for anything the
    schema rules out.
    """
    kind = entry.get("name")
    if kind not in METRIC_NAMES:
        raise EvaluationConfigError(f"{where}.name: unknown metric '{kind}'")
    p = entry.get("parameters", {})
    if not isinstance(p, dict):
        raise EvaluationConfigError(f"{where}.parameters must be an object")
    rep = entry.get("representation")
    if kind in _NEEDS_REFERENCE and reference is None:
        raise EvaluationConfigError(f"{where}: metric '{kind}' needs a run-level reference")
    seed = p.get("seed", default_seed)

    try:
        if kind == "novelty":
            spec = novelty_metric(reference)
        elif kind == "uniqueness":
            spec = uniqueness_metric()
        elif kind == "diversity":
            spec = diversity_metric(DiversityParams(k=p.get("k", "exact"), seed=seed))
        elif kind == "ngram":
            spec = ngram_metric(
                reference, NgramParams(N=p.get("N", 3), direction=p.get("direction", "maximize"))
            )
        elif kind == "fbd":
            spec = fbd_metric(reference, embedding=_require_rep(rep, where))
        elif kind == "mmd":
            spec = mmd_metric(
                reference, kernel=_kernel_from_params(p, where), embedding=_require_rep(rep, where)
            )
        elif kind == "precision":
            spec = precision_metric(reference, k=p.get("k", 3), embedding=_require_rep(rep, where))
        elif kind == "recall":
            spec = recall_metric(reference, k=p.get("k", 3), embedding=_require_rep(rep, where))
        elif kind == "authenticity":
            spec = authenticity_metric(reference, embedding=_require_rep(rep, where))
        elif kind == "vendi":
            spec = vendi_metric(
                kernel=_kernel_from_params(p, where),
                alpha=p.get("alpha", 1.0),
                embedding=_require_rep(rep, where),
            )
        elif kind == "vendi-fkea":
            spec = vendi_fkea_metric(
                FkeaParams(
                    num_features=p.get("num_features", 1000),
                    renyi_alpha=p.get("renyi_alpha", 1.0),
                    seed=seed,
                    sigma=p.get("sigma", 1.0),
                ),
                embedding=_require_rep(rep, where),
            )
        elif kind == "identity":
            spec = identity_metric(_require_rep(rep, where), _require_column(p, where))
        elif kind == "threshold":
            if "tau" not in p:
                raise EvaluationConfigError(f"{where}.parameters.tau is required")
            spec = threshold_metric(
                _require_rep(rep, where),
                _require_column(p, where),
                tau=float(p["tau"]),
                side=p.get("side", "above"),
            )
        elif kind == "hit-rate":
            spec = hit_rate_metric(_require_rep(rep, where), _require_column(p, where))
        elif kind == "hypervolume":
            spec = hypervolume_metric(
                _require_rep(rep, where),
                _columns_list(p, where),
                HypervolumeParams(
                    reference_point=p.get("reference_point"),
                    mode=p.get("mode", "pareto-indicator"),
                ),
            )
        elif kind == "conformity":
            spec = conformity_metric(
                reference,
                _require_rep(rep, where),
                _columns_list(p, where),
                ConformityParams(
                    folds=p.get("folds", 1),
                    seed=seed,
                    train_fraction=p.get("train_fraction", 0.5),
                ),
            )
        else:  # kl
            spec = kl_metric(
                reference,
                _require_rep(rep, where),
                _columns_list(p, where),
                KdeParams(
                    bandwidth=p.get("bandwidth", "scott"),
                    mc_samples=p.get("mc_samples", 10000),
                    seed=seed,
                    density_floor=p.get("density_floor", 1e-12),
                ),
            )
    except EvaluationConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise EvaluationConfigError(f"{where}.parameters: {exc}") from None

    label = entry.get("label")
    if label:
        spec.name = str(label)
    direction = entry.get("direction")
    if direction is not None:
        if direction not in ("maximize", "minimize"):
            raise EvaluationConfigError(f"{where}.direction must be maximize or minimize")
        spec.direction = direction
    fold = entry.get("fold")
    if fold is not None:
        k = fold.get("K")
        if not isinstance(k, int) or k < 2:
            raise EvaluationConfigError(f"{where}.fold.K must be an integer of at least 2")
        spec = fold_wrap(spec, k, fold.get("seed", default_seed))
    return spec


def _require_rep(rep, where: str) -> str:
    if not isinstance(rep, str) or not rep:
        raise EvaluationConfigError(f"{where}.representation is required for this metric")
    return rep


def _require_column(p: dict, where: str) -> str:
    col = p.get("column")
    if not isinstance(col, str) or not col:
        raise EvaluationConfigError(f"{where}.parameters.column is required")
    return col


def _columns_list(p: dict, where: str) -> list[str]:
    if "columns" in p:
        cols = p["columns"]
        if not isinstance(cols, list) or not cols or not all(isinstance(c, str) for c in cols):
            raise EvaluationConfigError(f"{where}.parameters.columns must be a non-empty list of names")
        return list(cols)
    return [_require_column(p, where)]
