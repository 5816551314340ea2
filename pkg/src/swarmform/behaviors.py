"""
Formation controllers.

A controller looks at the current World and returns the links and external
forces to use for the next integration step.

* dispersion: every agent springs toward its three nearest neighbors at the
  desired spacing; no leader, no state.
* line: agents are paired at a tiny spacing, pairs are chained at the desired
  spacing, and once the chain is whole its two end agents are pushed apart as
  interim leaders. Progress runs Pairing -> Chaining -> Stretching and never
  goes back.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .dynamics import DEFAULT_B, DEFAULT_K, LinkSet, World
from .metrics import link_residuals
from .topology import (
    Pair,
    PairGraph,
    chain_endpoints,
    dispersion_links,
    greedy_pairing,
    line_links,
    pair_centroids,
    pair_graph,
    path_order,
    symmetric_closure,
)


class Phase(str, enum.Enum):
    PAIRING = "Pairing"
    CHAINING = "Chaining"
    STRETCHING = "Stretching"


_PHASE_ORDER = {Phase.PAIRING: 0, Phase.CHAINING: 1, Phase.STRETCHING: 2}


@dataclass(frozen=True)
class ControlOutput:
    links: LinkSet
    external_forces: Mapping[int, np.ndarray] = field(default_factory=lambda: MappingProxyType({}))
    phase_label: str = ""


@dataclass(frozen=True)
class LineParams:
    epsilon: float = 0.5
    spacing: float = 10.0
    leader_force: float = 0.25
    spring_k: float = DEFAULT_K
    damping_b: float = DEFAULT_B
    sensing_range: float | None = None
    pair_close_factor: float = 2.0
    chain_residual_frac: float = 0.2

    def __post_init__(self):
        if not self.epsilon > 0 or not self.spacing > self.epsilon:
            raise ValueError("need 0 < epsilon < spacing")
        if not self.leader_force > 0:
            raise ValueError("leader_force must be positive")


@dataclass(frozen=True)
class Attachment:
    """An unpaired agent hung off a chain-end pair."""

    agent: int
    pair_index: int


@dataclass(frozen=True)
class LineControllerState:
    phase: Phase = Phase.PAIRING
    pairs: tuple[Pair, ...] | None = None
    graph: PairGraph | None = None
    leaders: tuple[int, int] | None = None
    leftovers: tuple[Attachment, ...] = ()
    links: LinkSet | None = None


def dispersion_controller(
    world: World,
    L_d: float,
    range_: float | None = None,
    *,
    spring_k: float = DEFAULT_K,
    damping_b: float = DEFAULT_B,
    symmetric: bool = True,
) -> ControlOutput:
    """Three-nearest-neighbor springs at ``L_d``; leaderless.

    With ``symmetric`` (the default) a selection by either agent links both
    ways, so every spring acts on both of its ends. One-sided selections make
    the forces non-reciprocal and let clusters self-propel indefinitely.
    """
    links = dispersion_links(world, L_d, 3, range_, spring_k=spring_k, damping_b=damping_b)
    if symmetric:
        links = symmetric_closure(links)
    return ControlOutput(links, MappingProxyType({}), "dispersion")


def leader_stretch_force(world: World, leader: int, graph: PairGraph, magnitude: float) -> np.ndarray:
    """Constant push on a chain-end leader, outward along the local chain axis.

    The direction runs from the centroid of the neighboring pair to the
    centroid of the leader's own pair.
    """
    if not magnitude > 0:
        raise ValueError("magnitude must be positive")
    own = next((p for p, pair in enumerate(graph.pairs) if leader in pair), None)
    if own is None:
        raise ValueError(f"agent {leader} is not in the pair graph")
    adj = graph.adjacency()[own]
    if len(adj) != 1:
        raise ValueError(f"agent {leader} is not at a chain end")
    cents = pair_centroids(world, graph.pairs)
    axis = cents[own] - cents[adj[0]]
    norm = float(np.hypot(axis[0], axis[1]))
    if norm < 1e-12:
        return np.zeros(2)
    return magnitude * axis / norm


def _attach_leftovers(world: World, pairs: list[Pair], graph: PairGraph, range_) -> tuple[Attachment, ...]:
    paired = {i for p in pairs for i in p}
    loose = [i for i in range(world.n) if i not in paired]
    if not loose or not pairs:
        return ()
    order = path_order(graph)
    if order is not None:
        ends = sorted({order[0], order[-1]})
    else:
        deg = graph.degree()
        ends = [p for p in range(len(pairs)) if deg[p] <= 1]
    cents = pair_centroids(world, pairs)
    out = []
    for agent in loose:
        d = np.hypot(*(cents[ends] - world.positions[agent]).T)
        best = int(np.argmin(d))
        if range_ is not None and d[best] > range_:
            continue
        out.append(Attachment(agent, ends[best]))
    return tuple(out)


def _leftover_links(state: LineControllerState, params: LineParams) -> LinkSet:
    src, dst = [], []
    for att in state.leftovers:
        for m in state.graph.pairs[att.pair_index]:
            src += [att.agent, m]
            dst += [m, att.agent]
    return LinkSet(src, dst, params.spacing, params.spring_k, params.damping_b)


def _pair_links(pairs, params: LineParams) -> LinkSet:
    src, dst = [], []
    for a, b in pairs:
        src += [a, b]
        dst += [b, a]
    return LinkSet(src, dst, params.epsilon, params.spring_k, params.damping_b)


def _chain_links(world: World, state: LineControllerState, params: LineParams) -> LinkSet:
    base = line_links(
        world, state.graph, params.epsilon, params.spacing,
        spring_k=params.spring_k, damping_b=params.damping_b,
    )
    return LinkSet.concat([base, _leftover_links(state, params)])


def _chain_label(graph: PairGraph) -> str:
    n_comp = len(graph.components())
    if n_comp > 1:
        return f"Chaining:components={n_comp}"
    return "Chaining"


def line_controller(
    world: World, state: LineControllerState, params: LineParams
) -> tuple[ControlOutput, LineControllerState]:
    """One control decision of the line-formation procedure.

    Pairs are matched once and frozen; the chain is built once the pairs have
    closed to within ``pair_close_factor * epsilon`` and is then frozen too.
    Stretching starts when the chain is a single path and every cross link is
    within ``chain_residual_frac * spacing`` of its rest length; the two
    leaders chosen at that moment keep their role for the rest of the run.
    """
    if world.n < 2:
        raise ValueError("line formation needs at least two agents")

    if state.phase is Phase.PAIRING:
        if state.pairs is None:
            state = replace(state, pairs=tuple(greedy_pairing(world, params.sensing_range)))
        pairs = list(state.pairs)
        links = _pair_links(pairs, params)
        if pairs and np.all(link_residuals(world, links) + params.epsilon <= params.pair_close_factor * params.epsilon):
            graph = pair_graph(world, pairs, params.sensing_range)
            leftovers = _attach_leftovers(world, pairs, graph, params.sensing_range)
            state = replace(state, phase=Phase.CHAINING, graph=graph, leftovers=leftovers)
            state = replace(state, links=_chain_links(world, state, params))
        else:
            return ControlOutput(links, MappingProxyType({}), Phase.PAIRING.value), state

    links = state.links

    if state.phase is Phase.CHAINING:
        leaders = chain_endpoints(world, state.graph)
        if leaders is None:
            return ControlOutput(links, MappingProxyType({}), _chain_label(state.graph)), state
        cross = _cross_mask(state.graph)
        resid = np.abs(link_residuals(world, links)[: cross.size][cross])
        if resid.size and np.all(resid <= params.chain_residual_frac * params.spacing):
            state = replace(state, phase=Phase.STRETCHING, leaders=leaders)
        else:
            return ControlOutput(links, MappingProxyType({}), Phase.CHAINING.value), state

    forces = {
        leader: leader_stretch_force(world, leader, state.graph, params.leader_force)
        for leader in state.leaders
    }
    return ControlOutput(links, MappingProxyType(forces), Phase.STRETCHING.value), state


def _cross_mask(graph: PairGraph) -> np.ndarray:
    """Which entries of ``line_links(graph)`` are cross links (same order)."""
    n_intra = 2 * len(graph.pairs)
    n_cross = 8 * len(graph.edges)
    mask = np.zeros(n_intra + n_cross, dtype=bool)
    mask[n_intra:] = True
    return mask


def phase_rank(label: str) -> int:
    return _PHASE_ORDER[Phase(label.split(":", 1)[0])]
