"""Certificates for cluster synchronization of nonidentical linear agents.

The central object is the synchronization certificate: with the dynamic
coupling law, the network synchronizes per cluster if and only if the
reduced coupled matrix  blockdiag{I (x) A_i} - c * (reduced (x) I_n)  is
Hurwitz. Around that sit the standing-assumption checks, a spectral
shortcut for identical agents, explicit lower bounds on the weighting
factors for cooperative spanning-tree subgraphs, and a necessity test on
acyclically partitioned graphs. ``certify`` bundles everything into one
structured, deterministically serializable report.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graphs import (
    ROW_SUM_TOL,
    ClusterGraph,
    PartitionedLaplacian,
    acyclic_partition,
    build_laplacian,
    check_zero_row_sums,
    has_directed_spanning_tree,
    subgraph_is_cooperative,
)
from .numerics import (
    LyapunovError,
    RiccatiSolution,
    assemble_reduced_dynamics,
    hurwitz_margin,
    solve_care,
    solve_lyapunov_weight,
    unstabilizable_mode,
)
from .reduction import (
    CENSUS_ABS_FLOOR,
    CENSUS_REL_TOL,
    WeightingFactors,
    ZeroCensus,
    reduce_laplacian,
    zero_eigenvalue_census,
)

__all__ = [
    "STRICT_SLACK",
    "AgentFamily",
    "ControlDesign",
    "AssumptionReport",
    "SyncCertificate",
    "IdenticalCertificate",
    "FactorBounds",
    "AcyclicCertificate",
    "CertificationReport",
    "ClusterConditionError",
    "agent_family",
    "design_gains",
    "check_assumptions",
    "certify_synchronization",
    "certify_identical_dynamics",
    "weighting_factor_bounds",
    "certify_acyclic",
    "certify",
]

# Strict inequalities in the certificates are granted with at least this
# much slack; bound attainment ("greater or equal") is accepted exactly.
STRICT_SLACK = 1e-9

_IDENTICAL_TOL = 1e-12


class ClusterConditionError(ValueError):
    """A per-cluster structural requirement (cooperative weights with a
    directed spanning tree) does not hold."""


@dataclass(frozen=True, eq=False)
class AgentFamily:
    """One linear model per cluster: x' = A_i x + B_i u for its members."""

    n: int
    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]

    @property
    def cluster_count(self) -> int:
        return len(self.A)

    def identical(self, tol: float = _IDENTICAL_TOL) -> bool:
        a0, b0 = self.A[0], self.B[0]
        for a, b in zip(self.A[1:], self.B[1:]):
            if b.shape != b0.shape:
                return False
            if np.max(np.abs(a - a0)) > tol or np.max(np.abs(b - b0)) > tol:
                return False
        return True


def agent_family(a_mats, b_mats) -> AgentFamily:
    a_list = [np.array(m, dtype=float) for m in a_mats]
    b_list = [np.array(m, dtype=float) for m in b_mats]
    if len(a_list) != len(b_list) or not a_list:
        raise ValueError("need one (A, B) pair per cluster")
    n = a_list[0].shape[0]
    for i, (a, b) in enumerate(zip(a_list, b_list)):
        if a.shape != (n, n):
            raise ValueError(f"cluster {i}: A must be {n} x {n}, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != n or b.shape[1] < 1:
            raise ValueError(f"cluster {i}: B must be {n} x m with m >= 1, got {b.shape}")
        a.setflags(write=False)
        b.setflags(write=False)
    return AgentFamily(n=n, A=tuple(a_list), B=tuple(b_list))


@dataclass(frozen=True, eq=False)
class ControlDesign:
    """Per-cluster feedback gains, normally induced by Riccati solutions.

    ``solutions`` is None when the gains were supplied directly rather
    than designed here.
    """

    gains: tuple[np.ndarray, ...]
    solutions: tuple[RiccatiSolution, ...] | None = None

    @property
    def costs(self) -> tuple[np.ndarray, ...] | None:
        if self.solutions is None:
            return None
        return tuple(s.P for s in self.solutions)


def design_gains(family: AgentFamily) -> ControlDesign:
    solutions = tuple(solve_care(a, b) for a, b in zip(family.A, family.B))
    return ControlDesign(gains=tuple(s.K for s in solutions), solutions=solutions)


@dataclass(frozen=True, eq=False)
class AssumptionReport:
    """Verdicts for the three standing assumptions, with witnesses.

    ``blocking_modes[i]`` is an unstable mode of cluster i that its input
    cannot reach (None when the pair is stabilizable). ``rightmost[i]``
    is the rightmost eigenvalue of A_i; clusters whose dynamics decay on
    their own would synchronize to zero trivially and are flagged.
    """

    stabilizable: tuple[bool, ...]
    blocking_modes: tuple[complex | None, ...]
    nondecaying: tuple[bool, ...]
    rightmost: tuple[complex, ...]
    balanced_grid: np.ndarray
    worst_row_sum: float
    row_sum_tol: float

    @property
    def all_stabilizable(self) -> bool:
        return all(self.stabilizable)

    @property
    def all_nondecaying(self) -> bool:
        return all(self.nondecaying)

    @property
    def all_balanced(self) -> bool:
        return bool(self.balanced_grid.all())

    @property
    def all_hold(self) -> bool:
        return self.all_stabilizable and self.all_nondecaying and self.all_balanced


def check_assumptions(
    family: AgentFamily,
    pl: PartitionedLaplacian,
    row_tol: float = ROW_SUM_TOL,
) -> AssumptionReport:
    stab, blocking, nondec, rightmost = [], [], [], []
    for a, b in zip(family.A, family.B):
        mode = unstabilizable_mode(a, b)
        stab.append(mode is None)
        blocking.append(mode)
        eigs = np.linalg.eigvals(a)
        top = complex(eigs[np.argmax(eigs.real)])
        rightmost.append(top)
        nondec.append(top.real >= -STRICT_SLACK)

    grid = check_zero_row_sums(pl, row_tol)
    worst = 0.0
    g = pl.graph
    for i in range(g.cluster_count):
        for j in range(g.cluster_count):
            rows = pl.block(i, j).sum(axis=1)
            worst = max(worst, float(np.max(np.abs(rows), initial=0.0)))
    return AssumptionReport(
        stabilizable=tuple(stab),
        blocking_modes=tuple(blocking),
        nondecaying=tuple(nondec),
        rightmost=tuple(rightmost),
        balanced_grid=grid,
        worst_row_sum=worst,
        row_sum_tol=row_tol,
    )


@dataclass(frozen=True)
class SyncCertificate:
    """Necessary-and-sufficient verdict: Hurwitz test of the reduced
    coupled dynamics. ``margin`` is the raw spectral abscissa distance."""

    holds: bool
    margin: float
    dimension: int


def certify_synchronization(
    family: AgentFamily,
    pl: PartitionedLaplacian,
    factors: WeightingFactors,
) -> SyncCertificate:
    red = reduce_laplacian(pl, factors)
    matrix = assemble_reduced_dynamics(family.A, pl.graph.sizes, red.reduced, factors.c)
    holds, margin = hurwitz_margin(matrix)
    return SyncCertificate(holds=holds, margin=margin, dimension=matrix.shape[0])


@dataclass(frozen=True)
class IdenticalCertificate:
    """Spectral-gap shortcut available when every cluster shares one
    model: synchronization holds iff the scaled reduced spectrum lies
    strictly right of the system spectrum."""

    applicable: bool
    holds: bool | None
    coupling_floor: float | None
    dynamics_ceiling: float | None
    gap: float | None


def certify_identical_dynamics(
    family: AgentFamily,
    pl: PartitionedLaplacian,
    factors: WeightingFactors,
) -> IdenticalCertificate:
    if not family.identical():
        return IdenticalCertificate(False, None, None, None, None)
    red = reduce_laplacian(pl, factors)
    ceiling = float(np.max(np.linalg.eigvals(family.A[0]).real))
    if red.reduced.size == 0:
        floor = np.inf
    else:
        floor = factors.c * float(np.min(np.linalg.eigvals(red.reduced).real))
    gap = floor - ceiling
    return IdenticalCertificate(
        applicable=True,
        holds=bool(gap > STRICT_SLACK),
        coupling_floor=float(floor),
        dynamics_ceiling=ceiling,
        gap=float(gap),
    )


@dataclass(frozen=True, eq=False)
class FactorBounds:
    """Explicit lower bounds on the weighting factors, independent of the
    feedback design.

    ``c_floor`` is a strict bound for the global factor; choosing any
    ``c`` above it together with local factors at or above
    ``local_floors`` guarantees synchronization exponentially fast with
    rate ``0.5 * (c - a_sym_ceiling)``. ``c_floor_refined`` is a tighter
    strict bound, evaluated with the local factors at their floors; it
    certifies stability but carries no rate guarantee.
    """

    c_floor: float
    local_floors: tuple[float, ...]
    c_floor_refined: float | None
    rate: float | None
    a_sym_ceiling: float | None
    weights: tuple[np.ndarray, ...]
    weight_ceiling: float | None
    cross_floor: float | None
    intra_floors: tuple[float | None, ...]

    def rate_for(self, c: float) -> float | None:
        if self.a_sym_ceiling is None:
            return None
        return 0.5 * (c - self.a_sym_ceiling)


def _validate_weight(w, hat_ii: np.ndarray, cluster: int) -> np.ndarray:
    w = np.atleast_2d(np.asarray(w, dtype=float))
    k = hat_ii.shape[0]
    if w.shape != (k, k):
        raise LyapunovError(f"cluster {cluster}: weight must be {k} x {k}, got {w.shape}")
    if float(np.linalg.norm(w - w.T)) > 1e-10 * max(1.0, float(np.linalg.norm(w))):
        raise LyapunovError(f"cluster {cluster}: weight must be symmetric")
    if k and np.linalg.eigvalsh(w)[0] <= 0.0:
        raise LyapunovError(f"cluster {cluster}: weight must be positive definite")
    form = w @ hat_ii + hat_ii.T @ w
    if k and np.linalg.eigvalsh(0.5 * (form + form.T))[0] <= 0.0:
        raise LyapunovError(
            f"cluster {cluster}: weight does not make the intra-cluster form positive definite"
        )
    return w


def weighting_factor_bounds(
    family: AgentFamily,
    pl: PartitionedLaplacian,
    user_weights=None,
    c: float | None = None,
) -> FactorBounds:
    """Lower bounds for the global and local weighting factors.

    Every cluster subgraph must be cooperatively weighted and contain a
    directed spanning tree; the Lyapunov weights then exist. Weights
    default to the solution of  W hat_ii + hat_ii^T W = I  and may be
    overridden per cluster.

    Raises:
        ClusterConditionError: naming the first cluster that is not
            cooperative or has no spanning tree.
        LyapunovError: when a user weight is invalid or a solve fails.
    """
    g = pl.graph
    for i in range(g.cluster_count):
        if not subgraph_is_cooperative(pl, i):
            raise ClusterConditionError(f"cluster {i} has a negative intra-cluster weight")
        if not has_directed_spanning_tree(pl, i):
            raise ClusterConditionError(f"cluster {i} has no directed spanning tree")

    ones = WeightingFactors(c=1.0, local=tuple(1.0 for _ in range(g.cluster_count)))
    red = reduce_laplacian(pl, ones)

    weights: list[np.ndarray] = []
    for i in range(g.cluster_count):
        hat_ii = red.block(i, i)
        if user_weights is not None and user_weights[i] is not None:
            weights.append(_validate_weight(user_weights[i], hat_ii, i))
        else:
            weights.append(solve_lyapunov_weight(hat_ii))

    c_floor = max(
        float(np.linalg.eigvalsh(a + a.T)[-1]) for a in family.A
    )

    reduced_dim = sum(s - 1 for s in g.sizes)
    if reduced_dim == 0:
        return FactorBounds(
            c_floor=c_floor,
            local_floors=tuple(0.0 for _ in range(g.cluster_count)),
            c_floor_refined=None,
            rate=None,
            a_sym_ceiling=None,
            weights=tuple(weights),
            weight_ceiling=None,
            cross_floor=None,
            intra_floors=tuple(None for _ in range(g.cluster_count)),
        )

    w_stack = scipy.linalg.block_diag(*[w for w, s in zip(weights, g.sizes) if s > 1])
    weight_ceiling = float(np.linalg.eigvalsh(w_stack)[-1])
    off = red.reduced_offdiag
    cross_form = w_stack @ off + off.T @ w_stack
    cross_floor = float(np.linalg.eigvalsh(0.5 * (cross_form + cross_form.T))[0])

    intra_floors: list[float | None] = []
    local_floors: list[float] = []
    for i in range(g.cluster_count):
        if g.sizes[i] == 1:
            intra_floors.append(None)
            local_floors.append(0.0)
            continue
        hat_ii = red.block(i, i)
        form = weights[i] @ hat_ii + hat_ii.T @ weights[i]
        floor_i = float(np.linalg.eigvalsh(0.5 * (form + form.T))[0])
        intra_floors.append(floor_i)
        local_floors.append((weight_ceiling - cross_floor) / floor_i)

    a_sym_parts = [
        np.kron(w, a + a.T)
        for w, a, s in zip(weights, family.A, g.sizes)
        if s > 1
    ]
    a_sym_weighted = scipy.linalg.block_diag(*a_sym_parts)
    refined_num = float(np.linalg.eigvalsh(0.5 * (a_sym_weighted + a_sym_weighted.T))[-1])
    candidate = WeightingFactors(c=1.0, local=tuple(local_floors))
    red_candidate = reduce_laplacian(pl, candidate)
    den_form = w_stack @ red_candidate.reduced + red_candidate.reduced.T @ w_stack
    refined_den = float(np.linalg.eigvalsh(0.5 * (den_form + den_form.T))[0])
    refined = refined_num / refined_den if refined_den > 0.0 else None

    a_sym_ceiling = max(
        float(np.linalg.eigvalsh(a + a.T)[-1])
        for a, s in zip(family.A, g.sizes)
        if s > 1
    )
    rate = 0.5 * (c - a_sym_ceiling) if c is not None else None
    return FactorBounds(
        c_floor=c_floor,
        local_floors=tuple(local_floors),
        c_floor_refined=refined,
        rate=rate,
        a_sym_ceiling=a_sym_ceiling,
        weights=tuple(weights),
        weight_ceiling=weight_ceiling,
        cross_floor=cross_floor,
        intra_floors=tuple(intra_floors),
    )


@dataclass(frozen=True)
class AcyclicCertificate:
    """Necessity test on acyclically partitioned graphs with cooperative
    subgraphs: synchronization holds iff every cluster subgraph has a
    spanning tree and each product c * c_i clears its cluster threshold.
    ``required[i]`` is the strict lower bound on c * c_i (None for
    single-node clusters, where there is nothing to couple)."""

    applicable: bool
    reason: str | None
    holds: bool | None
    spanning: tuple[bool, ...] | None
    required: tuple[float | None, ...] | None
    actual: tuple[float, ...] | None


def certify_acyclic(
    family: AgentFamily,
    g: ClusterGraph,
    pl: PartitionedLaplacian,
    factors: WeightingFactors,
) -> AcyclicCertificate:
    acyc = acyclic_partition(g)
    if not acyc.acyclic:
        return AcyclicCertificate(False, "partition is not acyclic", None, None, None, None)
    bad = [i for i in range(g.cluster_count) if not subgraph_is_cooperative(pl, i)]
    if bad:
        return AcyclicCertificate(
            False, f"cluster {bad[0]} has a negative intra-cluster weight",
            None, None, None, None,
        )

    ones = WeightingFactors(c=1.0, local=tuple(1.0 for _ in range(g.cluster_count)))
    red = reduce_laplacian(pl, ones)
    spanning = tuple(has_directed_spanning_tree(pl, i) for i in range(g.cluster_count))
    required: list[float | None] = []
    actual: list[float] = []
    holds = all(spanning)
    for i in range(g.cluster_count):
        scaled = factors.c * factors.local[i]
        actual.append(scaled)
        if g.sizes[i] == 1:
            required.append(None)
            continue
        hat_ii = red.block(i, i)
        min_re = float(np.min(np.linalg.eigvals(hat_ii).real))
        max_re_a = float(np.max(np.linalg.eigvals(family.A[i]).real))
        required.append(max_re_a / min_re if min_re > STRICT_SLACK else np.inf)
        # product form avoids dividing by a vanishing spectrum floor
        if scaled * min_re - max_re_a <= STRICT_SLACK:
            holds = False
    return AcyclicCertificate(
        applicable=True,
        reason=None,
        holds=bool(holds),
        spanning=spanning,
        required=tuple(required),
        actual=tuple(actual),
    )


@dataclass(frozen=True, eq=False)
class CertificationReport:
    """Everything the certification pipeline decided, with the numbers
    each verdict was computed from."""

    assumptions: AssumptionReport
    census: ZeroCensus
    synchronization: SyncCertificate
    identical: IdenticalCertificate
    bounds: FactorBounds | None
    bounds_reason: str | None
    acyclic: AcyclicCertificate
    c: float
    local: tuple[float, ...]

    def to_dict(self) -> dict:
        def _c(z: complex | None):
            return None if z is None else [float(z.real), float(z.imag)]

        bounds = None
        if self.bounds is not None:
            b = self.bounds
            bounds = {
                "c_floor": b.c_floor,
                "local_floors": list(b.local_floors),
                "c_floor_refined": b.c_floor_refined,
                "rate": b.rate,
                "a_sym_ceiling": b.a_sym_ceiling,
                "weight_ceiling": b.weight_ceiling,
                "cross_floor": b.cross_floor,
                "intra_floors": list(b.intra_floors),
                "weights": [w.tolist() for w in b.weights],
            }
        return {
            "factors": {"c": self.c, "local": list(self.local)},
            "assumptions": {
                "stabilizable": list(self.assumptions.stabilizable),
                "blocking_modes": [_c(z) for z in self.assumptions.blocking_modes],
                "nondecaying": list(self.assumptions.nondecaying),
                "rightmost_modes": [_c(z) for z in self.assumptions.rightmost],
                "balanced_grid": self.assumptions.balanced_grid.tolist(),
                "worst_row_sum": self.assumptions.worst_row_sum,
                "row_sum_tol": self.assumptions.row_sum_tol,
                "all_hold": self.assumptions.all_hold,
            },
            "census": {
                "cluster_zero_counts": list(self.census.cluster_zero_counts),
                "cluster_simple_zero": list(self.census.cluster_simple_zero),
                "total_zero_count": self.census.total_zero_count,
                "reduced_nonsingular": self.census.reduced_nonsingular,
                "rel_tol": self.census.rel_tol,
                "abs_floor": self.census.abs_floor,
            },
            "synchronization": {
                "holds": self.synchronization.holds,
                "margin": self.synchronization.margin,
                "dimension": self.synchronization.dimension,
            },
            "identical": {
                "applicable": self.identical.applicable,
                "holds": self.identical.holds,
                "coupling_floor": self.identical.coupling_floor,
                "dynamics_ceiling": self.identical.dynamics_ceiling,
                "gap": self.identical.gap,
            },
            "bounds": bounds,
            "bounds_reason": self.bounds_reason,
            "acyclic": {
                "applicable": self.acyclic.applicable,
                "reason": self.acyclic.reason,
                "holds": self.acyclic.holds,
                "spanning": None if self.acyclic.spanning is None else list(self.acyclic.spanning),
                "required": None if self.acyclic.required is None else [
                    None if r is None else float(r) for r in self.acyclic.required
                ],
                "actual": None if self.acyclic.actual is None else list(self.acyclic.actual),
            },
        }


def certify(
    family: AgentFamily,
    g: ClusterGraph,
    factors: WeightingFactors,
    user_weights=None,
    row_tol: float = ROW_SUM_TOL,
    census_rel: float = CENSUS_REL_TOL,
    census_floor: float = CENSUS_ABS_FLOOR,
) -> CertificationReport:
    """Run the whole certification pipeline on one problem instance."""
    if family.cluster_count != g.cluster_count:
        raise ValueError(
            f"{family.cluster_count} agent models for {g.cluster_count} clusters"
        )
    factors.require_count(g.cluster_count)
    pl = build_laplacian(g)
    assumptions = check_assumptions(family, pl, row_tol)
    census = zero_eigenvalue_census(pl, factors, census_rel, census_floor)
    sync = certify_synchronization(family, pl, factors)
    identical = certify_identical_dynamics(family, pl, factors)
    try:
        bounds = weighting_factor_bounds(family, pl, user_weights=user_weights, c=factors.c)
        bounds_reason = None
    except (ClusterConditionError, LyapunovError) as exc:
        bounds = None
        bounds_reason = str(exc)
    acyclic = certify_acyclic(family, g, pl, factors)
    return CertificationReport(
        assumptions=assumptions,
        census=census,
        synchronization=sync,
        identical=identical,
        bounds=bounds,
        bounds_reason=bounds_reason,
        acyclic=acyclic,
        c=factors.c,
        local=tuple(factors.local),
    )
