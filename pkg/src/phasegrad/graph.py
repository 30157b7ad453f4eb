"""Coupling topologies, graph Laplacians, and symmetric eigendecompositions.

A CouplingGraph is the static substrate every other module runs on: a
node partition (input / hidden / output) plus a weighted undirected edge
list. Asymmetric coupling, used only by the robustness experiments, is
expressed as per-direction overrides on top of the symmetric base.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


class DisconnectedGraphError(ValueError):
    """Raised when a graph (or a requested random draw) is not connected."""


def _union_find_connected(n: int, pairs) -> bool:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    root = find(0)
    return all(find(k) == root for k in range(n))


@dataclass(frozen=True)
class CouplingGraph:
    """Weighted undirected coupling graph with a node-role partition.

    edges holds (i, j, weight) with i < j and weight >= 0. Entries of
    directed_overrides are (i, j, weight) for ordered pairs and replace
    the base weight in that direction only; K[i, j] is the strength with
    which oscillator j pulls on oscillator i.
    """

    n: int
    input_nodes: tuple[int, ...]
    hidden_nodes: tuple[int, ...]
    output_nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]
    directed_overrides: tuple[tuple[int, int, float], ...] = field(default=())

    def __post_init__(self):
        all_nodes = (*self.input_nodes, *self.hidden_nodes, *self.output_nodes)
        if len(set(all_nodes)) != len(all_nodes):
            raise ValueError("node role sets overlap")
        if set(all_nodes) != set(range(self.n)):
            raise ValueError("node role sets must cover 0..n-1 exactly")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) violates 0 <= i < j < n")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if w < 0:
                raise ValueError(f"negative weight on edge ({i}, {j})")
            seen.add((i, j))
        pair_set = seen
        for i, j, w in self.directed_overrides:
            key = (i, j) if i < j else (j, i)
            if key not in pair_set:
                raise ValueError(f"override ({i}, {j}) has no underlying edge")
            if w < 0:
                raise ValueError(f"negative override on ({i}, {j})")
        live = [(i, j) for i, j, w in self.edges if w > 0]
        if self.n > 1 and not _union_find_connected(self.n, live):
            raise DisconnectedGraphError("graph is not connected")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_weights(self) -> FloatArray:
        return np.array([w for _, _, w in self.edges], dtype=np.float64)

    def coupling_matrix(self) -> FloatArray:
        """Dense K with overrides applied; fresh array every call."""
        k = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            k[i, j] = w
            k[j, i] = w
        for i, j, w in self.directed_overrides:
            k[i, j] = w
        return k

    def with_weights(self, weights: FloatArray) -> "CouplingGraph":
        """Same topology and roles, new symmetric edge weights."""
        if len(weights) != len(self.edges):
            raise ValueError("weight vector does not match edge list")
        new_edges = tuple(
            (i, j, float(w)) for (i, j, _), w in zip(self.edges, weights))
        return CouplingGraph(self.n, self.input_nodes, self.hidden_nodes,
                             self.output_nodes, new_edges)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order; eigenvectors as matching columns."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray


def build_layered(n_in: int, n_hid: int, n_out: int, k0: float) -> CouplingGraph:
    """Layered classifier topology at uniform weight k0.

    Full bipartite input-hidden and hidden-output blocks plus a path
    chain through the hidden layer; edge count is
    n_in*n_hid + n_hid*n_out + (n_hid - 1). Nodes are numbered inputs
    first, then hidden, then outputs.
    """
    if n_in < 1 or n_hid < 1 or n_out < 1:
        raise ValueError("every layer needs at least one node")
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    inputs = tuple(range(n_in))
    hidden = tuple(range(n_in, n_in + n_hid))
    outputs = tuple(range(n_in + n_hid, n_in + n_hid + n_out))
    pairs = []
    for i in inputs:
        for h in hidden:
            pairs.append((i, h))
    for a, b in zip(hidden, hidden[1:]):
        pairs.append((a, b))
    for h in hidden:
        for o in outputs:
            pairs.append((h, o))
    pairs.sort()
    edges = tuple((i, j, float(k0)) for i, j in pairs)
    return CouplingGraph(n_in + n_hid + n_out, inputs, hidden, outputs, edges)


def build_erdos_renyi(n: int, p: float, k_mean: float, rng,
                      max_retries: int = 100) -> CouplingGraph:
    """Connected Erdos-Renyi graph; weights k_mean * Uniform(0.5, 1.5).

    Each unordered pair enters independently with probability p; the
    draw repeats (same stream) until connected. Roles default to the
    last two nodes as outputs and the rest hidden, which is what the
    gradient-verification experiments use.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    hidden = tuple(range(n - 2))
    outputs = (n - 2, n - 1)
    for _ in range(max_retries):
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < p:
                    w = k_mean * rng.uniform(0.5, 1.5)
                    edges.append((i, j, float(w)))
        if _union_find_connected(n, [(i, j) for i, j, _ in edges]):
            return CouplingGraph(n, (), hidden, outputs, tuple(edges))
    raise DisconnectedGraphError(
        f"no connected draw in {max_retries} attempts (n={n}, p={p})")


def laplacian(g: CouplingGraph, edge_weights: FloatArray) -> FloatArray:
    """Weighted graph Laplacian L = D - W for weights aligned with g.edges."""
    if len(edge_weights) != len(g.edges):
        raise ValueError("edge_weights does not match the edge list")
    lap = np.zeros((g.n, g.n))
    for (i, j, _), w in zip(g.edges, edge_weights):
        lap[i, j] -= w
        lap[j, i] -= w
        lap[i, i] += w
        lap[j, j] += w
    return lap


def reduce(m: FloatArray, pin: int) -> FloatArray:
    """Delete row and column `pin`."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not 0 <= pin < m.shape[0]:
        raise ValueError(f"pin index {pin} out of range")
    keep = [k for k in range(m.shape[0]) if k != pin]
    return m[np.ix_(keep, keep)]


def eig_symmetric(m: FloatArray, sym_tol: float = 1e-10) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric matrix, ascending order.

    Column signs are canonicalized (largest-magnitude entry positive) so
    the decomposition is reproducible across LAPACK builds.
    """
    m = np.asarray(m, dtype=np.float64)
    if np.max(np.abs(m - m.T)) > sym_tol:
        raise ValueError("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(m)
    for col in range(vecs.shape[1]):
        lead = np.argmax(np.abs(vecs[:, col]))
        if vecs[lead, col] < 0:
            vecs[:, col] = -vecs[:, col]
    return SpectralDecomposition(vals, vecs)
