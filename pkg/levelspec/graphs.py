"""Simple graphs, their matrices and small-order exhaustive tools."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import networkx as nx

from .errors import DimensionError, FormatError, PreconditionError, check_guard
from .linalg import (
    IntegerMatrix,
    IntegerPolynomial,
    char_poly,
    invariant_factors,
    rank_rational,
)

MAX_ISOMORPHISM_ORDER = 10
MAX_ENUMERATE_GRAPHS_ORDER = 8

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Labelled simple graph on vertices ``0 .. n-1``.

    ``neighbours[v]`` is a bit mask whose bit ``u`` is set when ``u ~ v``.
    """

    n: int
    neighbours: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.neighbours) != self.n:
            raise DimensionError(f"{len(self.neighbours)} masks for {self.n} vertices")
        full = (1 << self.n) - 1
        for v, mask in enumerate(self.neighbours):
            if mask & ~full or mask >> v & 1:
                raise FormatError(f"vertex {v} has a loop or an out-of-range neighbour")
            for u in _bits(mask):
                if not self.neighbours[u] >> v & 1:
                    raise FormatError(f"adjacency is not symmetric at ({v}, {u})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Graph":
        masks = [0] * n
        for u, v in edges:
            if u == v:
                raise FormatError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise FormatError(f"edge ({u}, {v}) outside 0..{n - 1}")
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return cls(n, tuple(masks))

    @classmethod
    def from_adjacency(cls, M: IntegerMatrix) -> "Graph":
        if not M.is_square:
            raise DimensionError(f"adjacency must be square, got {M.rows}x{M.cols}")
        if any(x not in (0, 1) for x in M.entries):
            raise FormatError("adjacency entries must be 0 or 1")
        masks = tuple(
            sum(1 << j for j in range(M.cols) if M[i, j]) for i in range(M.rows)
        )
        return cls(M.rows, masks)

    @classmethod
    def from_networkx(cls, G: nx.Graph) -> "Graph":
        index = {node: k for k, node in enumerate(sorted(G.nodes()))}
        return cls.from_edges(len(index), ((index[u], index[v]) for u, v in G.edges()))

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges)
        return G

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.neighbours[u] >> v & 1)

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(
            (u, v) for u in range(self.n) for v in _bits(self.neighbours[u]) if u < v
        )

    @property
    def edge_count(self) -> int:
        return sum(mask.bit_count() for mask in self.neighbours) // 2

    def degree(self, v: int) -> int:
        return self.neighbours[v].bit_count()

    def degree_sequence(self) -> Tuple[int, ...]:
        return tuple(sorted((self.degree(v) for v in range(self.n)), reverse=True))

    def relabel(self, permutation: Sequence[int]) -> "Graph":
        """Send vertex ``v`` to ``permutation[v]``."""
        if sorted(permutation) != list(range(self.n)):
            raise PreconditionError("relabel needs a permutation of the vertices")
        return Graph.from_edges(
            self.n, ((permutation[u], permutation[v]) for u, v in self.edges)
        )


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class WalkMatrixReport:
    W: IntegerMatrix
    controllable: bool
    d_n: int


def adjacency(G: Graph) -> IntegerMatrix:
    return IntegerMatrix(
        G.n, G.n, tuple(int(G.has_edge(i, j)) for i in range(G.n) for j in range(G.n))
    )


def complement(G: Graph) -> Graph:
    full = (1 << G.n) - 1
    masks = (full & ~mask & ~(1 << v) for v, mask in enumerate(G.neighbours))
    return Graph(G.n, tuple(masks))


def _walk_columns(G: Graph) -> List[List[int]]:
    columns = [[1] * G.n]
    for _ in range(1, G.n):
        previous = columns[-1]
        columns.append([sum(previous[u] for u in _bits(mask)) for mask in G.neighbours])
    return columns


def walk_matrix(G: Graph) -> WalkMatrixReport:
    """Walk matrix ``[e, Ae, ..., A^{n-1}e]`` with its controllability data."""
    if G.n < 1:
        raise PreconditionError("the walk matrix needs at least one vertex")
    columns = _walk_columns(G)
    W = IntegerMatrix.from_rows([list(row) for row in zip(*columns)])
    controllable = rank_rational(W) == G.n
    d_n = invariant_factors(W)[-1]
    return WalkMatrixReport(W=W, controllable=controllable, d_n=d_n)


def is_controllable(G: Graph) -> bool:
    if G.n < 1:
        raise PreconditionError("controllability needs at least one vertex")
    W = IntegerMatrix.from_rows([list(row) for row in zip(*_walk_columns(G))])
    return rank_rational(W) == G.n


def _refine(graphs: Sequence[Graph]) -> List[List[int]]:
    """Colour refinement run jointly so colours are comparable across graphs."""
    colours = [[g.degree(v) for v in range(g.n)] for g in graphs]
    for _ in range(max((g.n for g in graphs), default=0)):
        signatures = [
            [
                (colour[v], tuple(sorted(colour[u] for u in _bits(g.neighbours[v]))))
                for v in range(g.n)
            ]
            for g, colour in zip(graphs, colours)
        ]
        palette: Dict[tuple, int] = {
            s: k for k, s in enumerate(sorted({s for sig in signatures for s in sig}))
        }
        refined = [[palette[s] for s in sig] for sig in signatures]
        if all(
            len(set(new)) == len(set(old)) for new, old in zip(refined, colours)
        ):
            return refined
        colours = refined
    return colours


def are_isomorphic(G: Graph, H: Graph, max_order: int = MAX_ISOMORPHISM_ORDER) -> bool:
    """Exhaustive isomorphism test, backtracking over refined colour classes."""
    if G.n != H.n:
        return False
    check_guard("order", G.n, max_order)
    if G.edge_count != H.edge_count or G.degree_sequence() != H.degree_sequence():
        return False
    colour_g, colour_h = _refine([G, H])
    if sorted(colour_g) != sorted(colour_h):
        return False

    candidates = {
        v: [w for w in range(H.n) if colour_h[w] == colour_g[v]] for v in range(G.n)
    }
    order = sorted(range(G.n), key=lambda v: (len(candidates[v]), v))
    mapping: Dict[int, int] = {}
    used = [False] * H.n

    def extend(depth: int) -> bool:
        if depth == G.n:
            return True
        v = order[depth]
        for w in candidates[v]:
            if used[w]:
                continue
            if any(
                G.has_edge(v, u) != H.has_edge(w, mapping[u]) for u in order[:depth]
            ):
                continue
            mapping[v], used[w] = w, True
            if extend(depth + 1):
                return True
            del mapping[v]
            used[w] = False
        return False

    return extend(0)


def _same_order(G: Graph, H: Graph) -> None:
    if G.n != H.n:
        raise PreconditionError(f"graphs have different orders {G.n} and {H.n}")


def spectrum_key(G: Graph) -> IntegerPolynomial:
    return char_poly(adjacency(G))


def is_cospectral(G: Graph, H: Graph, max_order: int = MAX_ISOMORPHISM_ORDER) -> bool:
    _same_order(G, H)
    if spectrum_key(G) != spectrum_key(H):
        return False
    return not are_isomorphic(G, H, max_order=max_order)


def is_generalized_cospectral(
    G: Graph, H: Graph, max_order: int = MAX_ISOMORPHISM_ORDER
) -> bool:
    _same_order(G, H)
    if spectrum_key(complement(G)) != spectrum_key(complement(H)):
        return False
    return is_cospectral(G, H, max_order=max_order)


def enumerate_graphs(
    n: int, max_order: int = MAX_ENUMERATE_GRAPHS_ORDER
) -> Iterator[Graph]:
    """Every labelled graph on ``n`` vertices, once, in edge-bitmask order."""
    check_guard("order", n, max_order)
    pairs = list(itertools.combinations(range(n), 2))
    for code in range(1 << len(pairs)):
        masks = [0] * n
        for k, (u, v) in enumerate(pairs):
            if code >> k & 1:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
        yield Graph(n, tuple(masks))


def empty_graph(n: int) -> Graph:
    return Graph(n, (0,) * n)


def complete_graph(n: int) -> Graph:
    return complement(empty_graph(n))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((v, v + 1) for v in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise PreconditionError("a cycle needs at least three vertices")
    return Graph.from_edges(n, ((v, (v + 1) % n) for v in range(n)))


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with the centre at vertex 0."""
    return Graph.from_edges(leaves + 1, ((0, v) for v in range(1, leaves + 1)))


def disjoint_union(G: Graph, H: Graph) -> Graph:
    shifted = ((u + G.n, v + G.n) for u, v in H.edges)
    return Graph.from_edges(G.n + H.n, itertools.chain(G.edges, shifted))
