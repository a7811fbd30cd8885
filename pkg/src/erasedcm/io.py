"""Plain-text and JSON file formats.

Node labels in every file are 1-based.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .cm_core import Multigraph, SimpleGraph
from .degree_model import DegreeSequence

__all__ = [
    "write_degree_sequence",
    "read_degree_sequence",
    "parse_degrees",
    "write_multigraph",
    "write_simple_graph",
    "read_edge_list",
    "write_json",
]

_HEADER = re.compile(r"#\s*(.*)")


def _write_int_rows(fh, rows, chunk: int = 65536) -> None:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[:, None]
    line = " ".join(["%d"] * rows.shape[1]) + "\n"
    for start in range(0, rows.shape[0], chunk):
        block = rows[start : start + chunk]
        fh.write((line * block.shape[0]) % tuple(block.ravel().tolist()))


def _format_value(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_degree_sequence(path, seq: DegreeSequence, **header) -> None:
    """One degree per line, with an optional ``# key=value ...`` first line."""
    with open(path, "w") as fh:
        if header:
            fh.write("# " + " ".join(f"{k}={_format_value(v)}" for k, v in header.items()) + "\n")
        _write_int_rows(fh, seq.degrees)


def read_degree_sequence(path) -> tuple[DegreeSequence, dict]:
    """Read a degree file, returning the sequence and its header fields as strings."""
    header: dict[str, str] = {}
    degrees = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            m = _HEADER.match(line)
            if m:
                if lineno == 0:
                    for tok in m.group(1).split():
                        key, _, val = tok.partition("=")
                        header[key] = val
                continue
            degrees.append(int(line))
    return DegreeSequence.from_degrees(degrees), header


def parse_degrees(text: str) -> DegreeSequence:
    """Degrees from a literal such as ``"2,2"`` or from a degree file path."""
    p = Path(text)
    if p.is_file():
        return read_degree_sequence(p)[0]
    try:
        values = [int(tok) for tok in re.split(r"[,\s]+", text.strip()) if tok]
    except ValueError:
        raise ValueError(f"not a degree list or readable file: {text!r}") from None
    if not values:
        raise ValueError("empty degree list")
    return DegreeSequence.from_degrees(values)


def _write_triples(path, rows: np.ndarray) -> None:
    with open(path, "w") as fh:
        _write_int_rows(fh, rows)


def write_multigraph(path, g: Multigraph) -> None:
    """Lines ``i j multiplicity``; self-loops as ``i i count``. Sorted by ``(i, j)``."""
    pairs = np.column_stack((g.pairs + 1, g.multiplicity))
    loops = np.column_stack((g.loop_nodes + 1, g.loop_nodes + 1, g.loop_counts))
    rows = np.concatenate((pairs, loops)).reshape(-1, 3)
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    _write_triples(path, rows[order])


def write_simple_graph(path, g: SimpleGraph) -> None:
    rows = np.column_stack((g.edges + 1, np.ones(g.num_edges, dtype=np.int64)))
    _write_triples(path, rows)


def read_edge_list(path, n: int | None = None) -> Multigraph:
    """Read an edge list written by `write_multigraph` or `write_simple_graph`."""
    rows = np.loadtxt(path, dtype=np.int64, ndmin=2, comments="#")
    if rows.size == 0:
        rows = rows.reshape(0, 3)
    i, j, c = rows[:, 0] - 1, rows[:, 1] - 1, rows[:, 2]
    loop = i == j
    n = int(n if n is not None else (rows[:, :2].max() if rows.size else 0))
    a, b = np.minimum(i, j)[~loop], np.maximum(i, j)[~loop]
    order = np.lexsort((b, a))
    lorder = np.argsort(i[loop], kind="stable")
    return Multigraph(
        n,
        np.column_stack((a, b))[order],
        c[~loop][order],
        i[loop][lorder],
        c[loop][lorder],
    )


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
