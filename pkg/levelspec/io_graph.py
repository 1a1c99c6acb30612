import csv
import io
import json
import os
import sys
from typing import Any, Dict, Iterable, List, Sequence

import networkx as nx

from .errors import FormatError
from .graphs import Graph
from .linalg import Matrix, RationalMatrix, format_matrix, parse_matrix

GRAPH6_HEADER = ">>graph6<<"


def to_graph6(G: Graph) -> str:
    data = nx.to_graph6_bytes(G.to_networkx(), nodes=range(G.n), header=False)
    return data.decode("ascii").strip()


def from_graph6(text: str) -> Graph:
    data = text.strip()
    if not data:
        raise FormatError("empty graph6 string")
    try:
        return Graph.from_networkx(nx.from_graph6_bytes(data.encode("ascii")))
    except (nx.NetworkXError, ValueError, UnicodeEncodeError) as exc:
        raise FormatError(f"malformed graph6 {data!r}: {exc}") from exc


def resolve_output_path(path_or_base: str, suffix: str) -> str:
    """Expand ``~`` and append ``suffix`` when the name has no extension."""
    path = os.path.expanduser(path_or_base)
    if os.path.isdir(path):
        raise IsADirectoryError(path)
    if os.path.splitext(path)[1]:
        return path
    return f"{path}{suffix}"


def _prepare(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def read_graph6_file(path: str) -> List[Graph]:
    with open(os.path.expanduser(path), encoding="ascii") as f:
        lines = [line.strip() for line in f]
    graphs = []
    for line in lines:
        if line.startswith(GRAPH6_HEADER):
            line = line[len(GRAPH6_HEADER) :]
        if line and not line.startswith("#"):
            graphs.append(from_graph6(line))
    return graphs


def write_graph6_file(graphs: Iterable[Graph], path: str) -> str:
    path = resolve_output_path(path, ".g6")
    _prepare(path)
    with open(path, "w", encoding="ascii") as f:
        for G in graphs:
            f.write(to_graph6(G) + "\n")
    return path


def read_matrix_file(path: str) -> RationalMatrix:
    with open(os.path.expanduser(path), encoding="utf-8") as f:
        return parse_matrix(f.read())


def write_matrix_file(M: Matrix, path: str) -> str:
    path = resolve_output_path(path, ".txt")
    _prepare(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_matrix(M) + "\n")
    return path


def load_json(path: str) -> Dict[str, Any]:
    with open(os.path.expanduser(path), encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def render_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render_csv(
    header: Sequence[str], rows: Iterable[Sequence[Any]], generated_at: str | None
) -> str:
    """CSV text; a ``# generated_at=...`` comment line precedes the header."""
    buffer = io.StringIO()
    if generated_at is not None:
        buffer.write(f"# generated_at={generated_at}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(os.path.expanduser(path), encoding="utf-8", newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def emit(text: str, out: str | None, suffix: str) -> str | None:
    """Write ``text`` to ``out`` (resolved with ``suffix``) or stdout when None."""
    if out is None:
        sys.stdout.write(text)
        return None
    path = resolve_output_path(out, suffix)
    _prepare(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return path
