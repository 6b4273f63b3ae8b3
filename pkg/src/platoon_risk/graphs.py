"""Weighted undirected communication graphs and their Laplacians.

Vertices are numbered 1..n in every public interface (matching the usual
platoon labeling); array indices are 0-based internally.  All graph types
are immutable: mutation helpers return new graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraphError, GraphConstructionError, ParameterError

_SYM_TOL = 1e-12


def _connected_components(weights: np.ndarray) -> list[list[int]]:
    """Connected components (0-based vertex lists) under positive weights."""
    n = weights.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.flatnonzero(weights[v] > 0):
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class CommGraph:
    """Simple, connected, undirected, weighted communication graph."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.n < 2:
            raise GraphConstructionError(f"need at least 2 vehicles, got n={self.n}")
        if w.shape != (self.n, self.n):
            raise GraphConstructionError(
                f"weight matrix must be {self.n}x{self.n}, got {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise GraphConstructionError("weights must be finite")
        if np.any(w < 0):
            raise GraphConstructionError("feedback gains must be >= 0")
        if np.any(np.abs(w - w.T) > _SYM_TOL):
            raise GraphConstructionError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise GraphConstructionError("self-links are not allowed")
        comps = _connected_components(w)
        if len(comps) > 1:
            parts = [[v + 1 for v in comp] for comp in comps]
            raise DisconnectedGraphError(
                f"graph is disconnected; vertex groups {parts}", components=parts
            )
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def laplacian(self) -> "Laplacian":
        return Laplacian.from_weights(self.weights)

    def edges(self) -> list[tuple[int, int, float]]:
        """Sorted edge list with 1-based vertices."""
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.weights[i, j] > 0:
                    out.append((i + 1, j + 1, float(self.weights[i, j])))
        return out

    def has_edge(self, i: int, j: int) -> bool:
        a, b = _vertex_pair(self.n, i, j)
        return bool(self.weights[a, b] > 0)

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w] for i, j, w in self.edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> "CommGraph":
        try:
            n = int(data["n"])
            edges = [(int(i), int(j), float(w)) for i, j, w in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphConstructionError(f"malformed graph document: {exc}") from exc
        return custom_graph(n, edges)


@dataclass(frozen=True)
class Laplacian:
    """Graph Laplacian; symmetric PSD with zero row sums."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphConstructionError("Laplacian must be square")
        if np.any(np.abs(m - m.T) > _SYM_TOL):
            raise GraphConstructionError("Laplacian must be symmetric")
        if np.any(np.abs(m.sum(axis=1)) > 1e-12):
            raise GraphConstructionError("Laplacian rows must sum to zero")
        off = m - np.diag(np.diag(m))
        if np.any(off > _SYM_TOL):
            raise GraphConstructionError("off-diagonal Laplacian entries must be <= 0")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> "Laplacian":
        w = np.asarray(weights, dtype=float)
        lap = np.diag(w.sum(axis=1)) - w
        # re-symmetrize exactly so row sums are zero to the last bit
        lap = (lap + lap.T) / 2.0
        np.fill_diagonal(lap, w.sum(axis=1))
        return cls(lap)


def _vertex_pair(n: int, i: int, j: int) -> tuple[int, int]:
    for v in (i, j):
        if not 1 <= v <= n:
            raise ParameterError(f"vertex {v} outside 1..{n}")
    if i == j:
        raise ParameterError(f"self-link ({i},{i}) is not allowed")
    return i - 1, j - 1


def path_graph(n: int) -> CommGraph:
    """Unweighted path 1-2-...-n."""
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return CommGraph(n, w)


def complete_graph(n: int) -> CommGraph:
    """Unweighted complete graph on n vertices."""
    w = np.ones((n, n)) - np.eye(n)
    return CommGraph(n, w)


def pcycle_graph(n: int, p: int) -> CommGraph:
    """Ring where each vehicle links to its p nearest neighbors each way."""
    if not 1 <= p <= (n - 1) // 2:
        raise ParameterError(
            f"p must lie in 1..floor((n-1)/2)={max((n - 1) // 2, 0)}, got p={p}"
        )
    w = np.zeros((n, n))
    for i in range(n):
        for d in range(1, p + 1):
            j = (i + d) % n
            w[i, j] = w[j, i] = 1.0
    return CommGraph(n, w)


def custom_graph(n: int, edges) -> CommGraph:
    """Graph from a 1-based edge list of (i, j) or (i, j, weight)."""
    w = np.zeros((n, n))
    for edge in edges:
        if len(edge) == 2:
            i, j = edge
            weight = 1.0
        else:
            i, j, weight = edge
        a, b = _vertex_pair(n, int(i), int(j))
        if weight <= 0:
            raise GraphConstructionError(
                f"edge ({i},{j}) must have positive weight, got {weight}"
            )
        w[a, b] = w[b, a] = float(weight)
    return CommGraph(n, w)


def build_standard(kind: str, n: int, *, p: int | None = None, edges=None) -> CommGraph:
    """Factory dispatch used by the CLI; kind is one of
    ``path | complete | pcycle | custom``."""
    if kind == "path":
        return path_graph(n)
    if kind == "complete":
        return complete_graph(n)
    if kind == "pcycle":
        if p is None:
            raise ParameterError("pcycle graphs need the neighbor count p")
        return pcycle_graph(n, p)
    if kind == "custom":
        if edges is None:
            raise ParameterError("custom graphs need an edge list")
        return custom_graph(n, edges)
    raise ParameterError(f"unknown graph kind {kind!r}")


def add_edge(g: CommGraph, i: int, j: int, weight: float = 1.0) -> CommGraph:
    """New graph with link (i, j) set to ``weight``."""
    a, b = _vertex_pair(g.n, i, j)
    if weight <= 0:
        raise ParameterError(f"edge weight must be > 0, got {weight}")
    w = g.weights.copy()
    w[a, b] = w[b, a] = float(weight)
    return CommGraph(g.n, w)


def remove_edge(g: CommGraph, i: int, j: int) -> CommGraph:
    """New graph without link (i, j); rejects removals that disconnect."""
    a, b = _vertex_pair(g.n, i, j)
    if g.weights[a, b] == 0:
        raise ParameterError(f"edge ({i},{j}) does not exist")
    w = g.weights.copy()
    w[a, b] = w[b, a] = 0.0
    comps = _connected_components(w)
    if len(comps) > 1:
        parts = [[v + 1 for v in comp] for comp in comps]
        raise DisconnectedGraphError(
            f"removing ({i},{j}) disconnects the graph into {parts}",
            components=parts,
        )
    return CommGraph(g.n, w)


def mutate_edge(g: CommGraph, i: int, j: int, action: str, weight: float = 1.0) -> CommGraph:
    """Edge mutation with action ``add`` or ``remove`` (CLI sweep surface)."""
    if action == "add":
        return add_edge(g, i, j, weight)
    if action == "remove":
        return remove_edge(g, i, j)
    raise ParameterError(f"unknown edge action {action!r}")
