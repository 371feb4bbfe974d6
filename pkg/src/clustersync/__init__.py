"""Cluster synchronization of nonidentical linear multi-agent systems.

Agents in different clusters follow different linear models and are
coupled through a dynamic law: each agent carries an auxiliary control
variable that mediates all interaction and decays to zero. This package
certifies whether a given partitioned interaction graph, agent family,
and pair of weighting factors synchronizes every cluster (a Hurwitz test
on a reduced coupled matrix), derives explicit lower bounds on the
factors, and reproduces closed-loop trajectories with per-cluster
metrics.
"""

from .certify import (
    AgentFamily,
    AssumptionReport,
    AcyclicCertificate,
    CertificationReport,
    ClusterConditionError,
    ControlDesign,
    FactorBounds,
    IdenticalCertificate,
    SyncCertificate,
    agent_family,
    certify,
    certify_acyclic,
    certify_identical_dynamics,
    certify_synchronization,
    check_assumptions,
    design_gains,
    weighting_factor_bounds,
)
from .graphs import (
    AcyclicityResult,
    ClusterGraph,
    PartitionedLaplacian,
    acyclic_partition,
    build_laplacian,
    blocks_balanced,
    check_zero_row_sums,
    cluster_graph,
    has_directed_spanning_tree,
    subgraph_is_cooperative,
)
from .numerics import (
    IntegrationResult,
    LyapunovError,
    RiccatiError,
    RiccatiSolution,
    Spectrum,
    StabilizabilityError,
    assemble_reduced_dynamics,
    hurwitz_margin,
    integrate_rk4,
    solve_care,
    solve_lyapunov_weight,
    spectrum,
    unstabilizable_mode,
)
from .reduction import (
    ReducedLaplacian,
    WeightingFactors,
    ZeroCensus,
    reduce_laplacian,
    reduce_via_similarity,
    weight_laplacian,
    zero_eigenvalue_census,
)
from .scenarios import (
    ConfigError,
    RunArtifacts,
    ScenarioConfig,
    builtin_scenarios,
    config_to_json,
    load_config,
    run,
    save_config,
)
from .simulation import (
    ClosedLoopSystem,
    DecayEstimate,
    SimulationResult,
    TrajectoryMetrics,
    aux_injection,
    build_closed_loop,
    compute_metrics,
    estimate_cluster_decay_rates,
    estimate_decay_rate,
    random_states,
    reduced_coordinates,
    reduced_matrix,
    separation_init,
    simulate,
)

__version__ = "0.1.0"
