"""Partitioned interaction graphs and their Laplacian block algebra.

A cluster graph is a weighted digraph on L nodes together with an ordered
partition of the nodes into N clusters. ``adjacency[l, k]`` is the weight
of the link from node k into node l; negative weights model repulsive
links, and the diagonal is zero (no self-links). The Laplacian follows
the row-sum convention, ``lap[l, l] = sum_k adjacency[l, k]`` and
``lap[l, k] = -adjacency[l, k]``, so every row sums to zero.

Nodes are relabeled on construction so that clusters occupy contiguous
index ranges in the order the partition listed them. The original node
labels are kept so reports can speak in the caller's numbering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EDGE_EPS",
    "ROW_SUM_TOL",
    "ClusterGraph",
    "PartitionedLaplacian",
    "AcyclicityResult",
    "cluster_graph",
    "build_laplacian",
    "check_zero_row_sums",
    "blocks_balanced",
    "has_directed_spanning_tree",
    "subgraph_is_cooperative",
    "acyclic_partition",
]

# |weight| at or below this is "no edge"; sign is checked separately.
EDGE_EPS = 1e-12
# Default tolerance for block row-sum balance (covers file-parsing noise;
# user-entered weights are expected to balance exactly).
ROW_SUM_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ClusterGraph:
    """Weighted digraph with an ordered, contiguous cluster partition.

    Attributes:
        adjacency: (L, L) weight matrix in canonical node order.
        sizes: cluster sizes, in cluster order.
        labels: ``labels[i]`` is the original label of canonical node i.
    """

    adjacency: np.ndarray
    sizes: tuple[int, ...]
    labels: tuple[int, ...]

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    @property
    def cluster_count(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Start index of each cluster in the canonical ordering."""
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def cluster_slice(self, i: int) -> slice:
        off = self.offsets[i]
        return slice(off, off + self.sizes[i])

    def cluster_members(self, i: int) -> tuple[int, ...]:
        """Original labels of the nodes in cluster i."""
        sl = self.cluster_slice(i)
        return tuple(self.labels[sl.start:sl.stop])

    def cluster_of(self, canonical_index: int) -> int:
        for i, sl in enumerate(self.cluster_slice(j) for j in range(self.cluster_count)):
            if sl.start <= canonical_index < sl.stop:
                return i
        raise IndexError(canonical_index)


def cluster_graph(adjacency, partition) -> ClusterGraph:
    """Build a :class:`ClusterGraph`, canonicalizing the node order.

    Args:
        adjacency: (L, L) array-like; entry [l, k] is the weight of the
            link from node k into node l. Diagonal must be zero.
        partition: iterable of clusters, each an iterable of distinct
            node indices (0-based). Clusters must be disjoint, nonempty,
            and together cover all L nodes. They need not be contiguous;
            nodes are relabeled and the map is retained in ``labels``.

    Raises:
        ValueError: on any shape, diagonal, or partition violation.
    """
    adj = np.asarray(adjacency, dtype=float)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {adj.shape}")
    if not np.all(np.isfinite(adj)):
        raise ValueError("adjacency contains non-finite entries")
    length = adj.shape[0]
    if np.any(np.diag(adj) != 0.0):
        bad = int(np.argmax(np.diag(adj) != 0.0))
        raise ValueError(f"adjacency has a self-link at node {bad}")

    groups = [tuple(int(v) for v in grp) for grp in partition]
    if not groups:
        raise ValueError("partition is empty")
    seen: set[int] = set()
    for idx, grp in enumerate(groups):
        if not grp:
            raise ValueError(f"cluster {idx} is empty")
        for v in grp:
            if not 0 <= v < length:
                raise ValueError(f"cluster {idx} references unknown node {v}")
            if v in seen:
                raise ValueError(f"node {v} appears in more than one cluster")
            seen.add(v)
    if len(seen) != length:
        missing = sorted(set(range(length)) - seen)
        raise ValueError(f"partition does not cover nodes {missing}")

    labels = tuple(v for grp in groups for v in sorted(grp))
    order = np.array(labels, dtype=int)
    canon = adj[np.ix_(order, order)]
    return ClusterGraph(
        adjacency=_freeze(canon),
        sizes=tuple(len(grp) for grp in groups),
        labels=labels,
    )


@dataclass(frozen=True, eq=False)
class PartitionedLaplacian:
    """Graph Laplacian cut into cluster-aligned blocks."""

    graph: ClusterGraph
    full: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        return self.full[self.graph.cluster_slice(i), self.graph.cluster_slice(j)]

    @property
    def blocks(self) -> tuple[tuple[np.ndarray, ...], ...]:
        n = self.graph.cluster_count
        return tuple(tuple(self.block(i, j) for j in range(n)) for i in range(n))


def build_laplacian(g: ClusterGraph) -> PartitionedLaplacian:
    """Laplacian of the graph: row sums of the adjacency on the diagonal,
    negated weights off it. Total on any valid :class:`ClusterGraph`."""
    adj = g.adjacency
    lap = np.diag(adj.sum(axis=1)) - adj
    return PartitionedLaplacian(graph=g, full=_freeze(lap))


def check_zero_row_sums(pl: PartitionedLaplacian, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Per-block balance test: entry (i, j) is True when every row of
    block (i, j) sums to zero within ``tol``. The clustering manifold is
    invariant exactly when the whole grid is True."""
    n = pl.graph.cluster_count
    out = np.empty((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            rows = pl.block(i, j).sum(axis=1)
            out[i, j] = float(np.max(np.abs(rows), initial=0.0)) <= tol
    return out


def blocks_balanced(pl: PartitionedLaplacian, tol: float = ROW_SUM_TOL) -> bool:
    return bool(check_zero_row_sums(pl, tol).all())


def _subgraph_edges(pl: PartitionedLaplacian, i: int) -> np.ndarray:
    """Directed edge matrix of cluster i's subgraph: entry [k, l] is True
    when node k influences node l (off-diagonal Laplacian entry nonzero).
    Negative weights still count as edges; sign is a separate check."""
    block = pl.block(i, i)
    present = np.abs(block) > EDGE_EPS
    np.fill_diagonal(present, False)
    return present.T.copy()


def _strong_components(edges: np.ndarray) -> list[list[int]]:
    """Kosaraju's algorithm on a dense boolean edge matrix."""
    n = edges.shape[0]
    order: list[int] = []
    seen = [False] * n

    def dfs(start: int, mat: np.ndarray, out: list[int]) -> None:
        stack = [start]
        seen[start] = True
        path = [start]
        iters = {start: iter(range(n))}
        while path:
            u = path[-1]
            advanced = False
            for w in iters[u]:
                if mat[u, w] and not seen[w]:
                    seen[w] = True
                    path.append(w)
                    iters[w] = iter(range(n))
                    advanced = True
                    break
            if not advanced:
                out.append(u)
                path.pop()

    for v in range(n):
        if not seen[v]:
            dfs(v, edges, order)
    seen = [False] * n
    comps: list[list[int]] = []
    for v in reversed(order):
        if not seen[v]:
            comp: list[int] = []
            dfs(v, edges.T, comp)
            comps.append(sorted(comp))
    return comps


def has_directed_spanning_tree(pl: PartitionedLaplacian, i: int) -> bool:
    """True when some node of cluster i reaches every other node of the
    cluster along directed intra-cluster edges.

    Decided through the condensation of the subgraph: a spanning
    out-tree exists iff exactly one strongly connected component has no
    incoming edge from another component.
    """
    edges = _subgraph_edges(pl, i)
    n = edges.shape[0]
    if n <= 1:
        return True
    comps = _strong_components(edges)
    comp_of = np.empty(n, dtype=int)
    for ci, comp in enumerate(comps):
        comp_of[comp] = ci
    has_incoming = [False] * len(comps)
    srcs, dsts = np.nonzero(edges)
    for k, l in zip(srcs, dsts):
        if comp_of[k] != comp_of[l]:
            has_incoming[comp_of[l]] = True
    return sum(1 for inc in has_incoming if not inc) == 1


def subgraph_is_cooperative(pl: PartitionedLaplacian, i: int) -> bool:
    """True when all intra-cluster weights of cluster i are nonnegative,
    i.e. off-diagonal entries of the diagonal block are <= 0."""
    block = pl.block(i, i).copy()
    np.fill_diagonal(block, 0.0)
    return bool(np.all(block <= EDGE_EPS))


@dataclass(frozen=True)
class AcyclicityResult:
    """Outcome of the condensed-graph cycle test.

    ``cluster_order`` and ``node_order`` are populated only when the
    partition is acyclic; relabeling clusters (and nodes) in that order
    makes every Laplacian block above the diagonal exactly zero.
    """

    acyclic: bool
    cluster_order: tuple[int, ...] | None
    node_order: tuple[int, ...] | None


def acyclic_partition(g: ClusterGraph) -> AcyclicityResult:
    """Collapse each cluster to one node and test the condensed graph
    for cycles (Kahn's algorithm, smallest-index tie-breaking)."""
    n = g.cluster_count
    adj = g.adjacency
    condensed = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            # edge cluster i -> cluster j: some node of i influences a node of j
            block = adj[g.cluster_slice(j), g.cluster_slice(i)]
            condensed[i, j] = bool(np.any(np.abs(block) > EDGE_EPS))

    indeg = condensed.sum(axis=0).astype(int)
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order: list[int] = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in np.nonzero(condensed[u])[0]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(int(v))
        ready.sort()
    if len(order) != n:
        return AcyclicityResult(acyclic=False, cluster_order=None, node_order=None)

    node_order: list[int] = []
    for i in order:
        sl = g.cluster_slice(i)
        node_order.extend(range(sl.start, sl.stop))
    return AcyclicityResult(
        acyclic=True,
        cluster_order=tuple(order),
        node_order=tuple(node_order),
    )
