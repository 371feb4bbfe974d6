"""Weighted Laplacians and the one-reference-node-per-cluster reduction.

The weighted Laplacian scales each diagonal (intra-cluster) block of the
plain Laplacian by its local factor while leaving inter-cluster blocks
untouched. Eliminating the first node of every cluster produces the
reduced matrix: block (i, j) of the reduced matrix is

    hat_ij = tilde_ij - ones * gamma_ij^T

where tilde_ij drops the reference row and column of block (i, j) and
gamma_ij is the reference node's row restricted to the non-reference
columns of cluster j. The reduced matrix is nonsingular exactly when the
weighted Laplacian has one zero eigenvalue per cluster and no more, which
is what :func:`zero_eigenvalue_census` decides.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import PartitionedLaplacian

__all__ = [
    "WeightingFactors",
    "ReducedLaplacian",
    "ZeroCensus",
    "weight_laplacian",
    "reduce_laplacian",
    "reduce_via_similarity",
    "zero_eigenvalue_census",
]

CENSUS_REL_TOL = 1e-9
CENSUS_ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class WeightingFactors:
    """Global coupling gain plus one local factor per cluster.

    The global gain must be positive. Local factors are nonnegative; a
    zero local factor switches off intra-cluster coupling for that
    cluster without removing its inter-cluster links.
    """

    c: float
    local: tuple[float, ...]

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0.0:
            raise ValueError(f"global factor must be positive, got {self.c}")
        for i, ci in enumerate(self.local):
            if not np.isfinite(ci) or ci < 0.0:
                raise ValueError(f"local factor {i} must be nonnegative, got {ci}")

    def require_count(self, n_clusters: int) -> None:
        if len(self.local) != n_clusters:
            raise ValueError(
                f"{len(self.local)} local factors for {n_clusters} clusters"
            )


def weight_laplacian(pl: PartitionedLaplacian, factors: WeightingFactors) -> np.ndarray:
    """Scale each diagonal block of the Laplacian by its local factor."""
    g = pl.graph
    factors.require_count(g.cluster_count)
    out = pl.full.copy()
    for i in range(g.cluster_count):
        sl = g.cluster_slice(i)
        out[sl, sl] *= factors.local[i]
    return out


@dataclass(frozen=True, eq=False)
class ReducedLaplacian:
    """Weighted Laplacian together with its reduction.

    Attributes:
        weighted: the (L, L) weighted Laplacian.
        reduced: the (L-N, L-N) reduced matrix, local factors applied on
            diagonal blocks.
        reduced_diag / reduced_offdiag: split of ``reduced`` into its
            block-diagonal and off-block-diagonal parts; they sum back to
            ``reduced`` exactly.
        hat_blocks / gammas / tildes: the unweighted per-pair pieces.
        sizes: cluster sizes (reduction drops one node per cluster).
    """

    weighted: np.ndarray
    reduced: np.ndarray
    reduced_diag: np.ndarray
    reduced_offdiag: np.ndarray
    hat_blocks: tuple[tuple[np.ndarray, ...], ...]
    gammas: tuple[tuple[np.ndarray, ...], ...]
    tildes: tuple[tuple[np.ndarray, ...], ...]
    sizes: tuple[int, ...]

    def block(self, i: int, j: int) -> np.ndarray:
        """Unweighted reduced block (i, j); local factors not applied."""
        return self.hat_blocks[i][j]

    @property
    def reduced_sizes(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.sizes)


def reduce_laplacian(pl: PartitionedLaplacian, factors: WeightingFactors) -> ReducedLaplacian:
    """Eliminate the first node of every cluster.

    Requires balanced Laplacian blocks for its spectral meaning (the
    census and certificates check that separately); the arithmetic here
    is defined for any partitioned Laplacian.
    """
    g = pl.graph
    factors.require_count(g.cluster_count)
    n = g.cluster_count
    offsets = g.offsets
    sizes = g.sizes
    full = pl.full

    hat: list[list[np.ndarray]] = []
    gammas: list[list[np.ndarray]] = []
    tildes: list[list[np.ndarray]] = []
    for i in range(n):
        hrow, grow, trow = [], [], []
        ri = offsets[i]
        rows = np.arange(ri + 1, ri + sizes[i])
        for j in range(n):
            rj = offsets[j]
            cols = np.arange(rj + 1, rj + sizes[j])
            tilde = full[np.ix_(rows, cols)]
            gamma = full[ri, cols]
            hrow.append(tilde - gamma[None, :])
            grow.append(gamma)
            trow.append(tilde)
        hat.append(hrow)
        gammas.append(grow)
        tildes.append(trow)

    dim = sum(s - 1 for s in sizes)
    reduced = np.zeros((dim, dim))
    diag = np.zeros((dim, dim))
    off = np.zeros((dim, dim))
    starts = np.concatenate([[0], np.cumsum([s - 1 for s in sizes])])
    for i in range(n):
        si = slice(starts[i], starts[i + 1])
        for j in range(n):
            sj = slice(starts[j], starts[j + 1])
            blk = factors.local[i] * hat[i][j] if i == j else hat[i][j]
            reduced[si, sj] = blk
            if i == j:
                diag[si, sj] = blk
            else:
                off[si, sj] = blk

    return ReducedLaplacian(
        weighted=weight_laplacian(pl, factors),
        reduced=reduced,
        reduced_diag=diag,
        reduced_offdiag=off,
        hat_blocks=tuple(tuple(r) for r in hat),
        gammas=tuple(tuple(r) for r in gammas),
        tildes=tuple(tuple(r) for r in tildes),
        sizes=tuple(sizes),
    )


def reduce_via_similarity(pl: PartitionedLaplacian, factors: WeightingFactors) -> np.ndarray:
    """Reduction through an explicit change of basis; an independent
    route to the same matrix as :func:`reduce_laplacian`.

    Per cluster the basis maps the reference node to itself and every
    other node to its offset from the reference. Conjugating the
    weighted Laplacian and moving all reference rows/columns to the
    front leaves the reduced matrix as the trailing principal block.
    """
    g = pl.graph
    factors.require_count(g.cluster_count)
    length = g.node_count
    s_mat = np.zeros((length, length))
    s_inv = np.zeros((length, length))
    for i in range(g.cluster_count):
        sl = g.cluster_slice(i)
        li = g.sizes[i]
        block = np.eye(li)
        block[1:, 0] = 1.0
        inv = np.eye(li)
        inv[1:, 0] = -1.0
        s_mat[sl, sl] = block
        s_inv[sl, sl] = inv

    conj = s_inv @ weight_laplacian(pl, factors) @ s_mat
    refs = list(g.offsets)
    others = [k for k in range(length) if k not in refs]
    perm = np.array(refs + others, dtype=int)
    rearranged = conj[np.ix_(perm, perm)]
    return rearranged[g.cluster_count:, g.cluster_count:]


def _kernel_dim(m: np.ndarray, rel_tol: float, abs_floor: float) -> int:
    """Rank deficiency via singular values; 0-by-0 matrices have full rank."""
    if m.size == 0:
        return 0
    svals = np.linalg.svd(m, compute_uv=False)
    cutoff = max(rel_tol * float(svals[0]), abs_floor)
    return int(np.sum(svals <= cutoff))


@dataclass(frozen=True)
class ZeroCensus:
    """Zero-eigenvalue structure of a weighted Laplacian.

    ``cluster_zero_counts`` are kernel dimensions of the scaled diagonal
    blocks; ``total_zero_count`` is the kernel dimension of the whole
    weighted Laplacian. The boolean verdicts come from nonsingularity of
    the reduced blocks, which decides the multiplicity statements
    exactly (each diagonal block has a simple zero iff its reduced block
    is nonsingular; the weighted Laplacian has exactly one zero per
    cluster iff the whole reduced matrix is nonsingular).
    """

    cluster_zero_counts: tuple[int, ...]
    cluster_simple_zero: tuple[bool, ...]
    total_zero_count: int
    reduced_nonsingular: bool
    rel_tol: float
    abs_floor: float

    @property
    def exactly_one_per_cluster(self) -> bool:
        return self.reduced_nonsingular


def zero_eigenvalue_census(
    pl: PartitionedLaplacian,
    factors: WeightingFactors,
    rel_tol: float = CENSUS_REL_TOL,
    abs_floor: float = CENSUS_ABS_FLOOR,
) -> ZeroCensus:
    g = pl.graph
    red = reduce_laplacian(pl, factors)

    counts = []
    simple = []
    for i in range(g.cluster_count):
        scaled = factors.local[i] * pl.block(i, i)
        counts.append(_kernel_dim(scaled, rel_tol, abs_floor))
        scaled_hat = factors.local[i] * red.block(i, i)
        simple.append(_kernel_dim(scaled_hat, rel_tol, abs_floor) == 0)

    total = _kernel_dim(red.weighted, rel_tol, abs_floor)
    nonsingular = _kernel_dim(red.reduced, rel_tol, abs_floor) == 0
    return ZeroCensus(
        cluster_zero_counts=tuple(counts),
        cluster_simple_zero=tuple(simple),
        total_zero_count=total,
        reduced_nonsingular=nonsingular,
        rel_tol=rel_tol,
        abs_floor=abs_floor,
    )
