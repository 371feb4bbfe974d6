"""Closed-loop assembly, trajectory integration, and cluster metrics.

Each agent carries a stacked state [x; eta] where eta is the auxiliary
control variable that mediates all coupling and decays to zero. Agent l
in cluster i evolves as

    z_l' = A_ci z_l - c * sum_k w_lk E z_k,

with A_ci upper block triangular (A_i and A_i + B_i K_i on the diagonal,
B_i K_i in the corner), E injecting eta - x into the eta equation, and
w_lk the weighted-Laplacian entry (local factor applied inside the
cluster). Stacking all agents gives one linear system that a fixed-step
integrator reproduces deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .certify import AgentFamily, ControlDesign
from .graphs import ClusterGraph, PartitionedLaplacian
from .numerics import integrate_rk4
from .reduction import WeightingFactors, reduce_laplacian, weight_laplacian

__all__ = [
    "ClosedLoopSystem",
    "TrajectoryMetrics",
    "SimulationResult",
    "DecayEstimate",
    "aux_injection",
    "build_closed_loop",
    "simulate",
    "random_states",
    "separation_init",
    "compute_metrics",
    "estimate_decay_rate",
    "estimate_cluster_decay_rates",
    "reduced_coordinates",
    "reduced_matrix",
]

DECAY_FLOOR = 1e-13


def aux_injection(n: int) -> np.ndarray:
    """Coupling injection block: maps a stacked [x; eta] to [0; eta - x]."""
    e = np.zeros((2 * n, 2 * n))
    e[n:, :n] = -np.eye(n)
    e[n:, n:] = np.eye(n)
    return e


@dataclass(frozen=True, eq=False)
class ClosedLoopSystem:
    family: AgentFamily
    design: ControlDesign
    graph: ClusterGraph
    factors: WeightingFactors
    coupling: np.ndarray      # weighted Laplacian, (L, L)
    agent_blocks: tuple[np.ndarray, ...]   # per-cluster drift of [x; eta]
    matrix: np.ndarray        # full closed-loop matrix, (2nL, 2nL)

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def agent_count(self) -> int:
        return self.graph.node_count


def build_closed_loop(
    family: AgentFamily,
    design: ControlDesign,
    pl: PartitionedLaplacian,
    factors: WeightingFactors,
) -> ClosedLoopSystem:
    g = pl.graph
    if family.cluster_count != g.cluster_count:
        raise ValueError(
            f"{family.cluster_count} agent models for {g.cluster_count} clusters"
        )
    factors.require_count(g.cluster_count)
    n = family.n

    blocks = []
    for a, b, k in zip(family.A, family.B, design.gains):
        bk = b @ k
        if bk.shape != (n, n):
            raise ValueError(f"gain/input mismatch: B K has shape {bk.shape}")
        top = np.hstack([a, bk])
        bottom = np.hstack([np.zeros((n, n)), a + bk])
        blocks.append(np.vstack([top, bottom]))

    per_agent = []
    for i in range(g.cluster_count):
        per_agent.extend([blocks[i]] * g.sizes[i])
    drift = scipy.linalg.block_diag(*per_agent)
    coupling = weight_laplacian(pl, factors)
    matrix = drift - factors.c * np.kron(coupling, aux_injection(n))
    return ClosedLoopSystem(
        family=family,
        design=design,
        graph=g,
        factors=factors,
        coupling=coupling,
        agent_blocks=tuple(blocks),
        matrix=matrix,
    )


@dataclass(frozen=True, eq=False)
class TrajectoryMetrics:
    """Per-sample cluster statistics of a trajectory.

    diameters[s, i] is the largest intra-cluster state distance in
    cluster i, aux_norm[s] the largest auxiliary-variable norm over all
    agents, and separations[s, p] the smallest cross-cluster state
    distance for the pair ``pairs[p]``.
    """

    t: np.ndarray
    diameters: np.ndarray
    aux_norm: np.ndarray
    separations: np.ndarray
    pairs: tuple[tuple[int, int], ...]


def compute_metrics(g: ClusterGraph, t: np.ndarray, x: np.ndarray, eta: np.ndarray) -> TrajectoryMetrics:
    samples = x.shape[0]
    n_clusters = g.cluster_count
    diameters = np.zeros((samples, n_clusters))
    for i in range(n_clusters):
        xi = x[:, g.cluster_slice(i), :]
        # pairwise distances inside the cluster, all samples at once
        diff = xi[:, :, None, :] - xi[:, None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        diameters[:, i] = dist.reshape(samples, -1).max(axis=1)

    aux_norm = np.linalg.norm(eta, axis=-1).max(axis=1)

    pairs = [(i, j) for i in range(n_clusters) for j in range(i + 1, n_clusters)]
    separations = np.zeros((samples, len(pairs)))
    for p, (i, j) in enumerate(pairs):
        xi = x[:, g.cluster_slice(i), :]
        xj = x[:, g.cluster_slice(j), :]
        diff = xi[:, :, None, :] - xj[:, None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        separations[:, p] = dist.reshape(samples, -1).min(axis=1)

    return TrajectoryMetrics(
        t=t,
        diameters=diameters,
        aux_norm=aux_norm,
        separations=separations,
        pairs=tuple(pairs),
    )


@dataclass(frozen=True, eq=False)
class SimulationResult:
    t: np.ndarray
    x: np.ndarray          # (samples, agents, n)
    eta: np.ndarray        # (samples, agents, n)
    metrics: TrajectoryMetrics
    diverged: bool


def simulate(
    system: ClosedLoopSystem,
    x0,
    eta0,
    step: float,
    horizon: float,
    downsample: int = 1,
) -> SimulationResult:
    """Integrate the closed loop and measure cluster metrics.

    ``downsample`` keeps every k-th sample (the integration step itself
    is unchanged). Divergence truncates the trajectory and is flagged.
    """
    if downsample < 1:
        raise ValueError(f"downsample must be >= 1, got {downsample}")
    n = system.n
    agents = system.agent_count
    x0 = np.asarray(x0, dtype=float)
    eta0 = np.asarray(eta0, dtype=float)
    if x0.shape != (agents, n) or eta0.shape != (agents, n):
        raise ValueError(f"initial states must have shape ({agents}, {n})")

    z0 = np.concatenate([np.concatenate([x0[l], eta0[l]]) for l in range(agents)])
    m = system.matrix
    result = integrate_rk4(lambda _t, z: m @ z, z0, step, horizon)

    t = result.t[::downsample]
    states = result.states[::downsample]
    stacked = states.reshape(len(t), agents, 2 * n)
    x = stacked[:, :, :n]
    eta = stacked[:, :, n:]
    metrics = compute_metrics(system.graph, t, x, eta)
    return SimulationResult(t=t, x=x, eta=eta, metrics=metrics, diverged=result.diverged)


def random_states(agents: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Generic initial states: uniform on [-1, 1] per coordinate."""
    return rng.uniform(-1.0, 1.0, size=(agents, n))


def separation_init(
    g: ClusterGraph,
    x0,
    rng: np.random.Generator | int,
    collision_tol: float = 1e-6,
    max_resample: int = 10,
) -> np.ndarray:
    """Auxiliary initial values that make clusters separate.

    Within each cluster, x_l(0) - eta_l(0) is forced to one common
    offset; the offsets are drawn at random per cluster so the free
    responses the clusters settle on differ generically. Draws are
    rejected when an offset nearly vanishes (everything would decay to
    zero) or two clusters nearly share an offset.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    x0 = np.asarray(x0, dtype=float)
    n = x0.shape[1]
    n_clusters = g.cluster_count
    for _ in range(max_resample):
        offsets = rng.uniform(-1.0, 1.0, size=(n_clusters, n))
        if any(np.linalg.norm(offsets[i]) < collision_tol for i in range(n_clusters)):
            continue
        collision = False
        for i in range(n_clusters):
            for j in range(i + 1, n_clusters):
                if np.linalg.norm(offsets[i] - offsets[j]) < collision_tol:
                    collision = True
        if collision:
            continue
        eta0 = np.empty_like(x0)
        for i in range(n_clusters):
            sl = g.cluster_slice(i)
            eta0[sl] = x0[sl] - offsets[i]
        return eta0
    raise RuntimeError(f"no admissible offsets after {max_resample} draws")


@dataclass(frozen=True)
class DecayEstimate:
    """Least-squares decay rate of a positive signal's logarithm over a
    tail window; ``decayed`` is False when the fit finds no decay."""

    rate: float | None
    decayed: bool
    points: int


def estimate_decay_rate(
    t: np.ndarray,
    values: np.ndarray,
    window: float = 0.2,
    floor: float = DECAY_FLOOR,
) -> DecayEstimate:
    if not 0.0 < window <= 1.0:
        raise ValueError(f"window must be a fraction in (0, 1], got {window}")
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    start = t[-1] - window * (t[-1] - t[0])
    mask = (t >= start) & (values > floor)
    pts = int(mask.sum())
    if pts < 2:
        return DecayEstimate(rate=None, decayed=False, points=pts)
    slope = np.polyfit(t[mask], np.log(values[mask]), 1)[0]
    if slope >= -1e-12:
        return DecayEstimate(rate=None, decayed=False, points=pts)
    return DecayEstimate(rate=float(-slope), decayed=True, points=pts)


def estimate_cluster_decay_rates(
    metrics: TrajectoryMetrics, window: float = 0.2
) -> tuple[DecayEstimate, ...]:
    return tuple(
        estimate_decay_rate(metrics.t, metrics.diameters[:, i], window)
        for i in range(metrics.diameters.shape[1])
    )


def reduced_coordinates(g: ClusterGraph, x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Project a trajectory onto the reduced error coordinates.

    For each non-reference agent l of cluster i (reference: the first
    node), the coordinate is (eta_l - eta_ref) - (x_l - x_ref). The
    stacked vector obeys the reduced coupled dynamics exactly.
    """
    samples = x.shape[0]
    cols = []
    for i in range(g.cluster_count):
        sl = g.cluster_slice(i)
        ref = sl.start
        for l in range(ref + 1, sl.stop):
            cols.append((eta[:, l, :] - eta[:, ref, :]) - (x[:, l, :] - x[:, ref, :]))
    if not cols:
        return np.zeros((samples, 0))
    return np.concatenate(cols, axis=1)


def reduced_matrix(
    family: AgentFamily, pl: PartitionedLaplacian, factors: WeightingFactors
) -> np.ndarray:
    """The reduced coupled dynamics matrix driving the error coordinates."""
    from .numerics import assemble_reduced_dynamics

    red = reduce_laplacian(pl, factors)
    return assemble_reduced_dynamics(family.A, pl.graph.sizes, red.reduced, factors.c)
