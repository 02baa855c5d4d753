"""On-disk formats: sequence files, embedding matrices, property tables,
and run configuration documents.

These are the package's external interface; layouts are bit-exact where
stated so other tools can produce and consume them.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import EmbeddingMatrix, EvaluationConfigError, PropertyColumn, PropertyTable, SequenceSet

MAGIC = b"SQME"
FORMAT_VERSION = 1
ELEM_F32 = 1
_HEADER = struct.Struct("<4sBBQQ")  # magic, version, element type, rows, cols


# ---------------------------------------------------------------------------
# sequences


def load_sequences(path: str, name: str | None = None) -> SequenceSet:
    """Read a FASTA or one-sequence-per-line file, sniffed by first non-blank byte.

    Order and duplicates are preserved; CRLF endings and trailing whitespace
    are tolerated. An empty file or a FASTA record with no body is an error.
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip() for ln in f]
    stripped = [ln for ln in lines if ln]
    if not stripped:
        raise ValueError(f"{path}: no sequences found")
    set_name = name if name is not None else path
    if stripped[0].startswith(">"):
        records: list[tuple[str, list[str]]] = []
        for ln in stripped:
            if ln.startswith(">"):
                records.append((ln[1:].strip(), []))
            else:
                if not records:
                    raise ValueError(f"{path}: sequence data before the first FASTA header")
                records[-1][1].append(ln)
        seqs = []
        for header, body in records:
            if not body:
                raise ValueError(f"{path}: FASTA record '{header}' has an empty body")
            seqs.append("".join(body))
        return SequenceSet(set_name, seqs)
    return SequenceSet(set_name, stripped)


def save_sequences(seqs: SequenceSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in seqs:
            f.write(s + "\n")


# ---------------------------------------------------------------------------
# embeddings, binary layout


def save_embeddings_binary(matrix: EmbeddingMatrix | np.ndarray, path: str) -> None:
    """Write magic "SQME", version 1, element type 1 (f32 LE), u64 rows and
    cols, then the row-major float payload."""
    data = matrix.data if isinstance(matrix, EmbeddingMatrix) else np.asarray(matrix)
    data = np.atleast_2d(data)
    rows, cols = data.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, ELEM_F32, rows, cols))
        f.write(data.astype("<f4").tobytes(order="C"))


def load_embeddings_binary(path: str) -> EmbeddingMatrix:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header ({len(raw)} of {_HEADER.size} bytes)")
    magic, version, elem, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r} at byte 0")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported version {version} at byte 4")
    if elem != ELEM_F32:
        raise ValueError(f"{path}: unsupported element type {elem} at byte 5")
    expected = rows * cols * 4
    payload = raw[_HEADER.size :]
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload holds {len(payload)} bytes at byte {_HEADER.size}, "
            f"expected {expected} for {rows}x{cols}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float64)
    return EmbeddingMatrix(data, source_id=path)


# ---------------------------------------------------------------------------
# embeddings, CSV layout


def save_embeddings_csv(matrix: EmbeddingMatrix | np.ndarray, path: str) -> None:
    """First line "dim=<d>", then one comma-separated row per point.

    Values are written with repr so a load gives back the same doubles.
    """
    data = matrix.data if isinstance(matrix, EmbeddingMatrix) else np.asarray(matrix)
    data = np.atleast_2d(data)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"dim={data.shape[1]}\n")
        for row in data:
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def load_embeddings_csv(path: str) -> EmbeddingMatrix:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise ValueError(f"{path}: line 1 must be 'dim=<d>'")
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise ValueError(f"{path}: line 1 has a non-integer dimension '{lines[0][4:]}'") from None
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != dim:
            raise ValueError(f"{path}: line {lineno} has {len(cells)} values, expected {dim}")
        row = []
        for colno, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: line {lineno}, column {colno}: '{cell}' is not a number") from None
            if not np.isfinite(v):
                raise ValueError(f"{path}: line {lineno}, column {colno}: non-finite value {cell}")
            row.append(v)
        rows.append(row)
    return EmbeddingMatrix(np.asarray(rows, dtype=np.float64).reshape(len(rows), dim), source_id=path)


def sniff_embedding_format(path: str) -> str:
    """'binary' if the file starts with the magic bytes, else 'csv'."""
    with open(path, "rb") as f:
        head = f.read(4)
    return "binary" if head == MAGIC else "csv"


# ---------------------------------------------------------------------------
# property tables (CSV with typed header)

_VALID_TYPES = ("real", "binary", "categorical")


def save_properties_csv(table: PropertyTable, path: str) -> None:
    """Header cells are "name:type"; a vec column of width k serializes as k
    adjacent cells "name[0]:vec<k>" .. "name[k-1]:vec<k>"."""
    header: list[str] = []
    for c in table.columns:
        if c.kind == "vec":
            header.extend(f"{c.name}[{i}]:vec<{c.width}>" for i in range(c.width))
        else:
            header.append(f"{c.name}:{c.kind}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in range(table.rows):
            row: list[str] = []
            for c in table.columns:
                if c.kind == "categorical":
                    row.append(c.values[r])
                elif c.kind == "vec":
                    row.extend(repr(float(v)) for v in c.values[r])
                else:
                    row.append(repr(float(c.values[r])))
            w.writerow(row)


@dataclass
class _ColSpec:
    name: str
    kind: str
    width: int = 1
    cells: list[int] = field(default_factory=list)  # header cell indices, in order


def _parse_property_header(cells: list[str], path: str) -> list[_ColSpec]:
    specs: list[_ColSpec] = []
    by_name: dict[str, _ColSpec] = {}
    for idx, cell in enumerate(cells):
        if ":" not in cell:
            raise ValueError(f"{path}: header cell {idx + 1} '{cell}' is missing its ':type' suffix")
        name, kind = cell.rsplit(":", 1)
        name, kind = name.strip(), kind.strip()
        if kind.startswith("vec<") and kind.endswith(">"):
            try:
                width = int(kind[4:-1])
            except ValueError:
                raise ValueError(f"{path}: header cell {idx + 1}: bad vector width in '{kind}'") from None
            if width < 1:
                raise ValueError(f"{path}: header cell {idx + 1}: vector width must be positive")
            if "[" not in name or not name.endswith("]"):
                raise ValueError(
                    f"{path}: header cell {idx + 1}: vector cells need an index, like 'name[0]:vec<{width}>'"
                )
            base, pos = name[:-1].rsplit("[", 1)
            try:
                pos = int(pos)
            except ValueError:
                raise ValueError(f"{path}: header cell {idx + 1}: bad vector index in '{name}'") from None
            spec = by_name.get(base)
            if spec is None:
                spec = _ColSpec(base, "vec", width)
                by_name[base] = spec
                specs.append(spec)
            if spec.kind != "vec" or spec.width != width:
                raise ValueError(f"{path}: header cell {idx + 1}: column '{base}' redeclared with a different type")
            if pos != len(spec.cells):
                raise ValueError(
                    f"{path}: header cell {idx + 1}: vector '{base}' cells out of order "
                    f"(index {pos} where {len(spec.cells)} was expected)"
                )
            spec.cells.append(idx)
            continue
        if kind not in _VALID_TYPES:
            raise ValueError(f"{path}: header cell {idx + 1}: unknown type token '{kind}'")
        if name in by_name:
            raise ValueError(f"{path}: header cell {idx + 1}: duplicate column '{name}'")
        spec = _ColSpec(name, kind, 1, [idx])
        by_name[name] = spec
        specs.append(spec)
    for spec in specs:
        if spec.kind == "vec" and len(spec.cells) != spec.width:
            raise ValueError(
                f"{path}: vector column '{spec.name}' declares width {spec.width} "
                f"but has {len(spec.cells)} cells"
            )
    return specs


def load_properties_csv(path: str) -> PropertyTable:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        rows = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError(f"{path}: empty property file")
    specs = _parse_property_header([c.strip() for c in rows[0]], path)
    width = sum(len(s.cells) for s in specs)
    raw: dict[str, list] = {s.name: [] for s in specs}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValueError(f"{path}: line {lineno} has {len(row)} cells, expected {width}")
        for spec in specs:
            if spec.kind == "categorical":
                raw[spec.name].append(row[spec.cells[0]].strip())
                continue
            vals = []
            for idx in spec.cells:
                cell = row[idx].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}, column '{spec.name}': '{cell}' is not a number"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(f"{path}: line {lineno}, column '{spec.name}': non-finite value")
                vals.append(v)
            raw[spec.name].append(vals[0] if spec.kind != "vec" else vals)
    cols = []
    for spec in specs:
        try:
            cols.append(PropertyColumn(spec.name, spec.kind, raw[spec.name]))
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
    return PropertyTable(cols, source_id=path)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """Declarative description of one evaluation run.

    All paths are resolved relative to the config file's directory.
    """

    groups: dict[str, str]
    reference: str | None = None
    representations: dict[str, dict] = field(default_factory=dict)
    metrics: list[dict] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    seed: int = 0
    base_dir: str = "."
    iterations: list[dict] = field(default_factory=list)


def load_run_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise EvaluationConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise EvaluationConfigError(f"{path}: top level must be an object")
    version = doc.get("config_version")
    if version != 1:
        raise EvaluationConfigError(f"{path}: config_version must be 1, got {version!r}")
    groups = doc.get("groups", {})
    iterations = doc.get("iterations", [])
    if not isinstance(groups, dict) or (not groups and not iterations):
        raise EvaluationConfigError(f"{path}: 'groups' must map group names to sequence-file paths")
    for gname, gpath in groups.items():
        if not isinstance(gpath, str):
            raise EvaluationConfigError(f"{path}: groups.{gname} must be a file path")
    reps = doc.get("representations", {})
    if not isinstance(reps, dict):
        raise EvaluationConfigError(f"{path}: 'representations' must be an object")
    for rep_id, rep in reps.items():
        if not isinstance(rep, dict) or "kind" not in rep:
            raise EvaluationConfigError(f"{path}: representations.{rep_id} needs a 'kind'")
        if rep["kind"] not in ("file", "kmer", "length"):
            raise EvaluationConfigError(
                f"{path}: representations.{rep_id}.kind must be file, kmer, or length"
            )
    metrics = doc.get("metrics", [])
    if not isinstance(metrics, list) or not metrics:
        raise EvaluationConfigError(f"{path}: 'metrics' must be a non-empty list")
    for i, m in enumerate(metrics):
        if not isinstance(m, dict) or "name" not in m:
            raise EvaluationConfigError(f"{path}: metrics[{i}] needs a 'name'")
        fold = m.get("fold")
        if fold is not None:
            if not isinstance(fold, dict) or "K" not in fold:
                raise EvaluationConfigError(f"{path}: metrics[{i}].fold needs 'K'")
            if not isinstance(fold["K"], int) or fold["K"] < 2:
                raise EvaluationConfigError(f"{path}: metrics[{i}].fold K must be an integer >= 2")
    outputs = doc.get("outputs", [])
    if not isinstance(outputs, list):
        raise EvaluationConfigError(f"{path}: 'outputs' must be a list")
    for i, out in enumerate(outputs):
        if not isinstance(out, dict) or "format" not in out or "path" not in out:
            raise EvaluationConfigError(f"{path}: outputs[{i}] needs 'format' and 'path'")
    for i, it in enumerate(iterations):
        if not isinstance(it, dict) or "index" not in it or "groups" not in it:
            raise EvaluationConfigError(f"{path}: iterations[{i}] needs 'index' and 'groups'")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise EvaluationConfigError(f"{path}: 'seed' must be an integer")
    return RunConfig(
        groups=dict(groups),
        reference=doc.get("reference"),
        representations=dict(reps),
        metrics=list(metrics),
        outputs=list(outputs),
        seed=seed,
        base_dir=os.path.dirname(os.path.abspath(path)),
        iterations=list(iterations),
    )
