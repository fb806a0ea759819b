"""Readers and writers for dissimilarity matrices, edge lists, task files and
ranked lists.

Binary matrix layout (little endian)::

    bytes 0..7    magic  b"DISSIM01"
    bytes 8..15   n      uint64
    bytes 16..    n * n  float64, row-major

Row ``i`` starts at byte ``16 + 8 * n * i``, so single rows can be read
without loading the whole matrix.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .ranking import RankedList, validate_dissimilarity
from .solvers import MultiQueryTask, QueryTask
from .spectral import embed_dissimilarity

log = logging.getLogger(__name__)

MAGIC = b"DISSIM01"
HEADER_BYTES = len(MAGIC) + 8
FORMATS = ("csv", "bin")
TASK_SCHEMA_VERSION = 1
RANKED_COLUMNS = ("query", "rank", "vertex", "name", "dissimilarity")

_SPLIT = re.compile(r"[,\s]+")


class FormatError(ValueError):
    """A file does not follow its documented layout."""


def infer_format(path: str | os.PathLike) -> str:
    return "bin" if Path(path).suffix.lower() in (".bin", ".dissim") else "csv"


def _read_csv_matrix(path: Path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                col = next(j for j, c in enumerate(cells) if not _is_float(c))
                raise FormatError(f"{path}: cell ({len(rows)}, {col}) on line {lineno} is not a number: {cells[col]!r}") from None
    if not rows:
        raise FormatError(f"{path}: no matrix rows")
    widths = {len(r) for r in rows}
    if widths != {len(rows)}:
        raise FormatError(f"{path}: expected a square matrix, got {len(rows)} rows with widths {sorted(widths)}")
    return np.array(rows, dtype=float)


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_bin_header(fh, path) -> int:
    head = fh.read(HEADER_BYTES)
    if len(head) < HEADER_BYTES or head[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: missing {MAGIC.decode()} header")
    return int(np.frombuffer(head[len(MAGIC):], dtype="<u8")[0])


def _read_bin_matrix(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        n = _read_bin_header(fh, path)
        body = fh.read()
    if len(body) != 8 * n * n:
        raise FormatError(f"{path}: header says n={n} ({8 * n * n} data bytes) but found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)


def read_binary_row(path: str | os.PathLike, i: int) -> np.ndarray:
    """Row ``i`` of a binary matrix file, read by offset."""
    path = Path(path)
    with open(path, "rb") as fh:
        n = _read_bin_header(fh, path)
        if not 0 <= i < n:
            raise IndexError(f"row {i} out of range for n={n}")
        fh.seek(HEADER_BYTES + 8 * n * i)
        data = fh.read(8 * n)
    if len(data) != 8 * n:
        raise FormatError(f"{path}: truncated at row {i}")
    return np.frombuffer(data, dtype="<f8").astype(float)


def load_dissimilarity_matrix(
    path: str | os.PathLike,
    format: str | None = None,
    symmetrize: str | None = None,
    label: str | None = None,
) -> np.ndarray:
    """Read and validate one dissimilarity matrix.

    ``format`` is ``"csv"`` or ``"bin"``; by default ``.bin``/``.dissim``
    files are binary and anything else is CSV.  An asymmetric matrix is an
    error unless ``symmetrize="avg"``, which replaces it by ``(D + D.T) / 2``.
    """
    path = Path(path)
    format = format or infer_format(path)
    if format not in FORMATS:
        raise ValueError(f"unknown matrix format {format!r}; expected one of {FORMATS}")
    if symmetrize not in (None, "avg"):
        raise ValueError(f"unknown symmetrize mode {symmetrize!r}; only 'avg' is supported")
    D = _read_csv_matrix(path) if format == "csv" else _read_bin_matrix(path)
    label = label or str(path)
    if symmetrize == "avg":
        asym = float(np.abs(D - D.T).max(initial=0.0))
        if asym > 0:
            log.info("%s: averaged with its transpose (max asymmetry %.3g)", label, asym)
        D = (D + D.T) / 2.0
    return validate_dissimilarity(D, label)


def save_dissimilarity_matrix(D: np.ndarray, path: str | os.PathLike, format: str | None = None) -> None:
    """Write ``D`` as CSV (17 significant digits) or in the binary layout."""
    path = Path(path)
    format = format or infer_format(path)
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {D.shape}")
    if format == "csv":
        np.savetxt(path, D, delimiter=",", fmt="%.17g")
    elif format == "bin":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(np.uint64(D.shape[0]).astype("<u8").tobytes())
            fh.write(np.ascontiguousarray(D, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown matrix format {format!r}; expected one of {FORMATS}")


def load_names(path: str | os.PathLike) -> list[str]:
    """Vertex-name manifest: one name per line, line ``i`` names vertex ``i``."""
    names = []
    with open(path) as fh:
        for line in fh:
            name = line.strip()
            if name and not name.startswith("#"):
                names.append(name)
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise FormatError(f"{path}: duplicate vertex name {dup!r}")
    return names


def save_names(names: Sequence[str], path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{name}\n" for name in names)


# edge lists


@dataclass(frozen=True)
class Graph:
    A: np.ndarray
    names: tuple[str, ...]


def read_edgelist(path: str | os.PathLike, undirected: bool = False) -> Graph:
    """Parse ``src dst [weight]`` lines, separated by whitespace or commas.

    If every endpoint is a nonnegative integer, ids are used as 0-based vertex
    indices and the vertex count is ``max id + 1``.  Otherwise vertices are
    numbered in order of first appearance.  Each line is an arc ``src -> dst``
    unless ``undirected``; an asymmetric result is averaged with its transpose.
    Repeated arcs add their weights and self-loops are dropped.
    """
    arcs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in _SPLIT.split(line) if p]
            if len(parts) not in (2, 3):
                raise FormatError(f"{path}: line {lineno}: expected 'src dst [weight]', got {line!r}")
            try:
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: weight {parts[2]!r} is not a number") from None
            if not np.isfinite(w) or w < 0:
                raise FormatError(f"{path}: line {lineno}: weight must be finite and nonnegative, got {w}")
            arcs.append((parts[0], parts[1], w))
    if not arcs:
        raise FormatError(f"{path}: no edges")

    tokens = [t for s, d, _ in arcs for t in (s, d)]
    if all(t.isdigit() for t in tokens):
        n = max(int(t) for t in tokens) + 1
        names = tuple(str(i) for i in range(n))
        index = {t: int(t) for t in tokens}
    else:
        index = {}
        for t in tokens:
            index.setdefault(t, len(index))
        names = tuple(index)
        n = len(names)

    A = np.zeros((n, n))
    loops = 0
    for s, d, w in arcs:
        i, j = index[s], index[d]
        if i == j:
            loops += 1
            continue
        A[i, j] += w
        if undirected:
            A[j, i] += w
    if loops:
        log.warning("%s: dropped %d self-loops", path, loops)
    if not np.array_equal(A, A.T):
        log.info("%s: directed arcs present; averaging with the transpose", path)
        A = (A + A.T) / 2.0
    return Graph(A, names)


def write_edgelist(A: np.ndarray, path: str | os.PathLike, names: Sequence[str] | None = None) -> None:
    """Upper-triangle edges of a symmetric adjacency matrix, one per line."""
    A = np.asarray(A, dtype=float)
    rows, cols = np.nonzero(np.triu(A, k=1))
    label = (lambda i: names[i]) if names is not None else str
    with open(path, "w") as fh:
        for i, j in zip(rows, cols):
            fh.write(f"{label(i)} {label(j)} {float(A[i, j])!r}\n")


def largest_component(A: np.ndarray) -> np.ndarray:
    """Sorted vertex ids of the largest connected component.

    Ties go to the component containing the smallest vertex id.
    """
    _, labels = connected_components(A != 0, directed=False)
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


@dataclass(frozen=True)
class EmbeddedGraph:
    D: np.ndarray
    names: tuple[str, ...]
    kept: np.ndarray  # ids in the input numbering


def load_edgelist_and_embed(
    path: str | os.PathLike,
    kind: str = "ASE",
    d: int = 2,
    lcc: bool = False,
    undirected: bool = False,
) -> EmbeddedGraph:
    """Embed an edge-list graph and return its pairwise Euclidean dissimilarity."""
    graph = read_edgelist(path, undirected=undirected)
    kept = np.arange(graph.A.shape[0])
    A = graph.A
    if lcc:
        kept = largest_component(A)
        if kept.size < A.shape[0]:
            log.info("%s: kept %d of %d vertices in the largest component", path, kept.size, A.shape[0])
        A = A[np.ix_(kept, kept)]
    D = embed_dissimilarity(A, kind, d)
    return EmbeddedGraph(D, tuple(graph.names[i] for i in kept), kept)


# task files


@dataclass(frozen=True)
class TaskSpec:
    task: MultiQueryTask
    evalset: tuple[int, ...] | None = None


def _resolver(refs: list, names: Sequence[str] | None, where: str):
    kinds = {type(r) for r in refs}
    if kinds - {int, str}:
        raise FormatError(f"{where}: vertices must be integer indices or string names")
    if kinds == {int, str}:
        raise FormatError(f"{where}: vertex indices and names cannot be mixed")
    if kinds == {str}:
        if names is None:
            raise FormatError(f"{where}: vertices are given by name but no name manifest was supplied")
        lookup = {name: i for i, name in enumerate(names)}

        def resolve(r):
            if r not in lookup:
                raise FormatError(f"{where}: unknown vertex name {r!r}")
            return lookup[r]

        return resolve
    return int


def _pair(entry, where: str) -> tuple:
    if not isinstance(entry, dict) or "query" not in entry or "similar" not in entry:
        raise FormatError(f"{where}: expected an object with 'query' and 'similar'")
    if not isinstance(entry["similar"], list):
        raise FormatError(f"{where}: 'similar' must be a list")
    return entry["query"], entry["similar"]


def parse_task(doc: dict, names: Sequence[str] | None = None, where: str = "task") -> TaskSpec:
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected a JSON object")
    version = doc.get("schema_version")
    if version != TASK_SCHEMA_VERSION:
        raise FormatError(f"{where}: unsupported schema_version {version!r}; expected {TASK_SCHEMA_VERSION}")
    if "target" not in doc:
        raise FormatError(f"{where}: missing 'target'")
    pairs = [_pair(doc["target"], f"{where}: target")]
    aux = doc.get("auxiliary", [])
    if not isinstance(aux, list):
        raise FormatError(f"{where}: 'auxiliary' must be a list")
    pairs += [_pair(e, f"{where}: auxiliary[{k}]") for k, e in enumerate(aux)]
    evaluation = doc.get("evaluation")
    if evaluation is not None and not isinstance(evaluation, list):
        raise FormatError(f"{where}: 'evaluation' must be a list")

    refs = [r for q, S in pairs for r in (q, *S)] + list(evaluation or [])
    resolve = _resolver(refs, names, where)
    tasks = tuple(QueryTask(resolve(q), tuple(resolve(s) for s in S)) for q, S in pairs)
    evalset = None if evaluation is None else tuple(resolve(v) for v in evaluation)
    return TaskSpec(MultiQueryTask(tasks), evalset)


def load_task(path: str | os.PathLike, names: Sequence[str] | None = None) -> TaskSpec:
    """Read a JSON task file.

    ``{"schema_version": 1, "target": {"query": q, "similar": [...]},
    "auxiliary": [{"query": q, "similar": [...]}, ...], "evaluation": [...]}``.
    Vertices are all indices or all names; names need a manifest.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_task(doc, names, str(path))


def task_document(spec: TaskSpec, names: Sequence[str] | None = None) -> dict:
    label = (lambda v: names[v]) if names is not None else int
    target, *aux = spec.task.tasks
    doc = {
        "schema_version": TASK_SCHEMA_VERSION,
        "target": {"query": label(target.q), "similar": [label(s) for s in target.S]},
        "auxiliary": [{"query": label(t.q), "similar": [label(s) for s in t.S]} for t in aux],
    }
    if spec.evalset is not None:
        doc["evaluation"] = [label(v) for v in spec.evalset]
    return doc


def save_task(spec: TaskSpec, path: str | os.PathLike, names: Sequence[str] | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(task_document(spec, names), fh, indent=2)
        fh.write("\n")


# ranked lists


def write_ranked_list(ranked: RankedList, stream, names: Sequence[str] | None = None) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RANKED_COLUMNS)
    for r, (v, value) in enumerate(zip(ranked.order, ranked.values), start=1):
        writer.writerow([ranked.query, r, int(v), names[v] if names is not None else "", repr(float(value))])


def read_ranked_list(path: str | os.PathLike) -> tuple[RankedList, dict[str, int]]:
    """Inverse of :func:`write_ranked_list`; also returns the name -> id map."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RANKED_COLUMNS:
            raise FormatError(f"{path}: expected columns {','.join(RANKED_COLUMNS)}")
        rows = list(reader)
    if not rows:
        raise FormatError(f"{path}: empty ranked list")
    try:
        queries = {int(r["query"]) for r in rows}
        ranks = [int(r["rank"]) for r in rows]
        order = np.array([int(r["vertex"]) for r in rows])
        values = np.array([float(r["dissimilarity"]) for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if len(queries) != 1:
        raise FormatError(f"{path}: rows disagree on the query")
    if ranks != list(range(1, len(rows) + 1)):
        raise FormatError(f"{path}: ranks must run 1..{len(rows)} in order")
    if len(set(order.tolist())) != order.size:
        raise FormatError(f"{path}: a vertex is listed twice")
    name_map = {r["name"]: int(r["vertex"]) for r in rows if r["name"]}
    return RankedList(queries.pop(), order, values), name_map


def read_vertex_list(path: str | os.PathLike) -> list[str]:
    """Vertex references from a text file, separated by commas, spaces or newlines."""
    refs = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            refs += [p for p in _SPLIT.split(line) if p]
    return refs


def resolve_refs(refs: Iterable[str], name_map: dict[str, int] | None = None) -> tuple[int, ...]:
    """Turn textual vertex references into ids: all integers, or all names."""
    refs = list(refs)
    numeric = [r.isdigit() for r in refs]
    if all(numeric):
        return tuple(int(r) for r in refs)
    if any(numeric):
        raise FormatError("vertex indices and names cannot be mixed")
    if not name_map:
        raise FormatError("vertices are given by name but no names are available")
    missing = [r for r in refs if r not in name_map]
    if missing:
        raise FormatError(f"unknown vertex name {missing[0]!r}")
    return tuple(name_map[r] for r in refs)


__all__ = [
    "EmbeddedGraph",
    "FORMATS",
    "FormatError",
    "Graph",
    "MAGIC",
    "TaskSpec",
    "largest_component",
    "load_dissimilarity_matrix",
    "load_edgelist_and_embed",
    "load_names",
    "load_task",
    "parse_task",
    "read_binary_row",
    "read_edgelist",
    "read_ranked_list",
    "read_vertex_list",
    "resolve_refs",
    "save_dissimilarity_matrix",
    "save_names",
    "save_task",
    "write_edgelist",
    "write_ranked_list",
]
