"""
swarmform
=========
Deterministic 2-D swarm simulator built on virtual spring-damper links.

Two formation behaviors are provided: leaderless dispersion from
three-nearest-neighbor springs, and line formation from paired agents chained
together and stretched by two interim leaders.
"""

from .behaviors import (
    ControlOutput,
    LineControllerState,
    LineParams,
    Phase,
    dispersion_controller,
    leader_stretch_force,
    line_controller,
)
from .dynamics import (
    AgentState,
    LinkSet,
    NumericalDivergence,
    SimParams,
    SpringLink,
    World,
    displacement_vector,
    integrate_step,
    kinetic_energy,
    net_force,
    net_forces,
    pair_force,
)
from .metrics import ErrorStats, LineFit, collinearity, component_count, is_converged, neighbor_distance_error
from .scenario import (
    ConfigError,
    OutputConfig,
    RunResult,
    ScenarioConfig,
    init_world,
    run,
    write_metrics,
    write_trajectory,
)
from .topology import (
    Pair,
    PairGraph,
    chain_endpoints,
    connected_components,
    dispersion_links,
    greedy_pairing,
    k_nearest,
    line_links,
    neighbors_within_range,
    pair_graph,
)

__version__ = "0.1.0"
