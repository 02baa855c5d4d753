"""Command-line entry point.

Thin shell over the library: every subcommand loads files, delegates to
library operations, and writes the declared artifacts. Exit codes: 0 on
success, 1 when metric cells errored, 2 for configuration problems.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import formats, report
from .core import (
    Cache,
    EvaluationConfigError,
    ReportTable,
    SequenceSet,
    TrajectoryTable,
    evaluate,
)
from .diagnostics import knn_feature_alignment, pca_project, spearman_alignment
from .metrics import metric_from_entry
from .representations import KmerSpec, Representations, kmer_embed, kmer_embedder, length_property

CACHE_DIR_ENV = "SEQEVAL_CACHE_DIR"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvaluationConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqeval",
        description="Evaluate generated biological sequences against reference data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="run the metrics declared in a config file")
    p_eval.add_argument("--config", required=True, help="run configuration (JSON)")
    p_eval.add_argument("--out-dir", default=None, help="directory for declared outputs")
    p_eval.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_eval.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel (group, metric) cells")
    p_eval.add_argument("--allow-errors", action="store_true",
                        help="exit 0 even when some cells errored")
    p_eval.set_defaults(func=cmd_evaluate)

    p_diag = sub.add_parser("diagnose", help="check how well an embedding tracks a property")
    p_diag.add_argument("--embeddings", required=True, help="embedding matrix file")
    p_diag.add_argument("--properties", required=True, help="property table (CSV)")
    p_diag.add_argument("--labels", default=None, help="categorical column for the k-NN check")
    p_diag.add_argument("--k", type=int, default=5, help="neighborhood size for the k-NN check")
    p_diag.add_argument("--spearman", default=None,
                        help="numeric column for the rank-alignment check")
    p_diag.add_argument("--pca", default=None, help="write a 2-D projection scatter SVG here")
    p_diag.set_defaults(func=cmd_diagnose)

    p_embed = sub.add_parser("embed", help="write k-mer frequency embeddings for a sequence file")
    p_embed.add_argument("--sequences", required=True, help="FASTA or one-per-line sequence file")
    p_embed.add_argument("--kmer", type=int, required=True, help="k-mer length")
    p_embed.add_argument("--alphabet", default=None, help="alphabet to enumerate k-mers over")
    p_embed.add_argument("--vocab", default=None, help="file listing one k-mer per line")
    p_embed.add_argument("--counts", action="store_true", help="raw counts instead of frequencies")
    p_embed.add_argument("--out", required=True, help="output path (binary embedding format)")
    p_embed.set_defaults(func=cmd_embed)

    p_iter = sub.add_parser("iterate", help="evaluate a series of design iterations")
    p_iter.add_argument("--config", required=True, help="run configuration with an iterations list")
    p_iter.add_argument("--out-dir", default=None, help="directory for trajectory artifacts")
    p_iter.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_iter.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_iter.set_defaults(func=cmd_iterate)

    return parser


# ---------------------------------------------------------------------------
# shared plumbing


def _resolve_path(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _load_groups(cfg: formats.RunConfig, group_paths: dict[str, str]) -> dict[str, SequenceSet]:
    groups = {}
    for name, path in group_paths.items():
        groups[name] = formats.load_sequences(_resolve_path(cfg.base_dir, path), name=name)
    return groups


def _resolve_reference(cfg: formats.RunConfig, groups: dict[str, SequenceSet]) -> SequenceSet | None:
    if cfg.reference is None:
        return None
    if cfg.reference in groups:
        return groups[cfg.reference]
    return formats.load_sequences(_resolve_path(cfg.base_dir, cfg.reference), name="reference")


def _build_resolver(
    cfg: formats.RunConfig,
    cache: Cache,
    file_overrides: dict | None = None,
) -> Representations:
    reps = Representations(cache)
    for rep_id, rspec in cfg.representations.items():
        kind = rspec["kind"]
        params = rspec.get("parameters", {})
        where = f"representations.{rep_id}"
        if kind == "kmer":
            if "k" not in params:
                raise EvaluationConfigError(f"{where}.parameters.k is required")
            try:
                spec = KmerSpec(
                    k=params["k"],
                    alphabet=params.get("alphabet"),
                    vocabulary=params.get("vocabulary"),
                    normalize=params.get("normalize", True),
                )
            except ValueError as exc:
                raise EvaluationConfigError(f"{where}.parameters: {exc}") from None
            reps.register_embedder(rep_id, kmer_embedder(spec))
        elif kind == "length":
            reps.register_property(rep_id, length_property)
        else:  # file
            paths = params.get("paths")
            if not isinstance(paths, dict) or not paths:
                raise EvaluationConfigError(
                    f"{where}.parameters.paths must map group names to files"
                )
            for gname, path in paths.items():
                reps.register_file(rep_id, gname, _resolve_path(cfg.base_dir, path))
    if file_overrides:
        for rep_id, by_group in file_overrides.items():
            if rep_id not in cfg.representations:
                raise EvaluationConfigError(
                    f"iteration override names unknown representation '{rep_id}'"
                )
            for gname, path in by_group.items():
                reps.register_file(rep_id, gname, _resolve_path(cfg.base_dir, path))
    return reps


def _build_metrics(cfg: formats.RunConfig, reference: SequenceSet | None, seed: int):
    specs = []
    for i, entry in enumerate(cfg.metrics):
        specs.append(metric_from_entry(entry, reference, f"metrics[{i}]", default_seed=seed + i))
    return specs


def _make_cache() -> Cache:
    return Cache(cache_dir=os.environ.get(CACHE_DIR_ENV) or None)


def _write_outputs(cfg: formats.RunConfig, table: ReportTable, out_dir: str | None) -> None:
    base = out_dir if out_dir is not None else cfg.base_dir
    for i, out in enumerate(cfg.outputs):
        fmt, rel = out["format"], out["path"]
        path = _resolve_path(base, rel)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        if fmt in ("markdown", "csv", "json"):
            text = report.render_table(table, fmt)
        elif fmt == "bar-svg":
            text = report.render_chart(table, _chart_spec("bar", out))
        elif fmt == "parallel-svg":
            text = report.render_chart(table, _chart_spec("parallel-coordinates", out))
        else:
            raise EvaluationConfigError(f"outputs[{i}].format: unknown format '{fmt}'")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _chart_spec(kind: str, out: dict) -> report.ChartSpec:
    return report.ChartSpec(
        kind=kind,
        metrics=out.get("metrics"),
        error_bars=out.get("error_bars", "deviation"),
        width=out.get("width", 640),
        height=out.get("height", 400),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_evaluate(args) -> int:
    cfg = formats.load_run_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    if cfg.iterations and not cfg.groups:
        raise EvaluationConfigError(f"{args.config}: config declares iterations; use the iterate subcommand")
    groups = _load_groups(cfg, cfg.groups)
    reference = _resolve_reference(cfg, groups)
    resolver = _build_resolver(cfg, _make_cache())
    specs = _build_metrics(cfg, reference, seed)
    table = evaluate(groups, specs, resolver, jobs=max(1, args.jobs))
    print(report.render_table(table, "markdown"), end="")
    _write_outputs(cfg, table, args.out_dir)
    if table.has_errors:
        for g in table.group_names:
            for m in table.metrics:
                cell = table.cell(g, m.name)
                if not cell.ok:
                    print(f"cell error ({g}, {m.name}): {cell.error}", file=sys.stderr)
        if not args.allow_errors:
            return 1
    return 0


def cmd_diagnose(args) -> int:
    emb = _load_embeddings_any(args.embeddings)
    table = formats.load_properties_csv(args.properties)
    if table.rows != emb.rows:
        print(
            f"error: {args.properties} has {table.rows} rows but {args.embeddings} has {emb.rows}",
            file=sys.stderr,
        )
        return 2
    if args.labels is None and args.spearman is None and args.pca is None:
        print("error: nothing to do; pass --labels, --spearman, or --pca", file=sys.stderr)
        return 2
    labels = None
    if args.labels is not None:
        col = table.column(args.labels)
        labels = [str(v) for v in (col.values if col.kind == "categorical" else list(col.values))]
        score = knn_feature_alignment(emb.data, labels, k=args.k)
        print(f"FAS: {score:.4f}")
    if args.spearman is not None:
        col = table.column(args.spearman)
        if col.kind == "categorical":
            print(f"error: column '{args.spearman}' is categorical; the rank check needs numbers",
                  file=sys.stderr)
            return 2
        score = spearman_alignment(emb.data, col.values)
        print(f"Spearman: {score:.4f}")
    if args.pca is not None:
        proj = pca_project(emb.data, out_dim=2)
        svg = report.render_scatter(proj.coordinates, labels)
        with open(args.pca, "w", encoding="utf-8") as f:
            f.write(svg)
        print(f"wrote {args.pca}")
    return 0


def _load_embeddings_any(path: str):
    if formats.sniff_embedding_format(path) == "binary":
        return formats.load_embeddings_binary(path)
    return formats.load_embeddings_csv(path)


def cmd_embed(args) -> int:
    seqs = formats.load_sequences(args.sequences)
    if (args.alphabet is None) == (args.vocab is None):
        print("error: pass exactly one of --alphabet or --vocab", file=sys.stderr)
        return 2
    vocabulary = None
    if args.vocab is not None:
        with open(args.vocab, "r", encoding="utf-8") as f:
            vocabulary = [ln.strip() for ln in f if ln.strip()]
    for i, s in enumerate(seqs):
        if len(s) < args.kmer:
            print(
                f"error: {args.sequences}: sequence at line {i + 1} has length {len(s)}, "
                f"shorter than k={args.kmer}",
                file=sys.stderr,
            )
            return 2
    spec = KmerSpec(
        k=args.kmer,
        alphabet=args.alphabet,
        vocabulary=vocabulary,
        normalize=not args.counts,
    )
    matrix = kmer_embed(seqs, spec)
    formats.save_embeddings_binary(matrix, args.out)
    print(f"wrote {args.out} ({matrix.rows}x{matrix.dim})")
    return 0


def cmd_iterate(args) -> int:
    cfg = formats.load_run_config(args.config)
    if not cfg.iterations:
        raise EvaluationConfigError(f"{args.config}: 'iterations' list is required for iterate")
    seed = args.seed if args.seed is not None else cfg.seed
    cache = _make_cache()
    entries = []
    last_index = None
    for it in cfg.iterations:
        index = it["index"]
        if not isinstance(index, int):
            raise EvaluationConfigError("iterations[].index must be an integer")
        if last_index is not None and index <= last_index:
            raise EvaluationConfigError(
                f"iteration indices must be strictly increasing; {index} follows {last_index}"
            )
        last_index = index
        groups = _load_groups(cfg, it["groups"])
        reference = _resolve_reference(cfg, groups)
        resolver = _build_resolver(cfg, cache, file_overrides=it.get("representations"))
        specs = _build_metrics(cfg, reference, seed)
        entries.append((index, evaluate(groups, specs, resolver, jobs=max(1, args.jobs))))
    traj = TrajectoryTable(entries)
    out_dir = args.out_dir if args.out_dir is not None else cfg.base_dir
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "trajectory.json"), "w", encoding="utf-8") as f:
        f.write(report.trajectory_to_json(traj))
    with open(os.path.join(out_dir, "trajectory.csv"), "w", encoding="utf-8") as f:
        f.write(report.trajectory_to_csv(traj))
    svg = report.render_chart(traj, report.ChartSpec(kind="trajectory"))
    with open(os.path.join(out_dir, "trajectory.svg"), "w", encoding="utf-8") as f:
        f.write(svg)
    print(report.trajectory_to_csv(traj), end="")
    for _, table in entries:
        if table.has_errors:
            for g in table.group_names:
                for m in table.metrics:
                    cell = table.cell(g, m.name)
                    if not cell.ok:
                        print(f"cell error ({g}, {m.name}): {cell.error}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
