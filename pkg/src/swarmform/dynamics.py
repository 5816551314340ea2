"""
Virtual spring-damper dynamics for planar point-mass swarms.

Every directed link ``i -> j`` acts on agent ``i`` only:

    f_i = -sum_j ( k_ij * d_ij + b_ij * (v_i - v_j) )
    d_ij = (|x_i - x_j| - L_ij) * (x_i - x_j) / |x_i - x_j|

Integration is semi-implicit Euler over a double buffer:

    v[t+1] = v[t] + dt * f[t] / m
    x[t+1] = x[t] + dt * v[t+1]

At ``dt = 1`` this is the second-order position recurrence
``x[t+1] = 2 x[t] - x[t-1] + f(x[t], v[t]) / m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rng import SplitMix64

COINCIDENT_EPS = 1e-9
DEFAULT_K = 0.05
DEFAULT_B = 0.1


class NumericalDivergence(FloatingPointError):
    """Raised when an integration step produces a non-finite state."""

    def __init__(self, agent_id: int, step: int | None = None):
        self.agent_id = agent_id
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite state for agent {agent_id}{where}")


@dataclass(frozen=True)
class AgentState:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"agent {self.id}: mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class SpringLink:
    """Directed control edge; the force it produces acts on ``src``."""

    src: int
    dst: int
    rest_length: float
    k: float
    b: float

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"self-link on agent {self.src}")
        for name in ("rest_length", "k", "b"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {val}")


class LinkSet:
    """
    Array-backed collection of directed spring links.

    Links are kept in insertion order; that order fixes the reduction order of
    each agent's force sum. Duplicate ``(src, dst)`` entries are rejected.
    """

    __slots__ = ("src", "dst", "rest", "k", "b")

    def __init__(self, src=(), dst=(), rest=(), k=(), b=(), *, check: bool = True):
        self.src = np.asarray(src, dtype=np.intp).reshape(-1)
        self.dst = np.asarray(dst, dtype=np.intp).reshape(-1)
        n = self.src.size
        self.rest = np.broadcast_to(np.asarray(rest, dtype=float), (n,)).copy()
        self.k = np.broadcast_to(np.asarray(k, dtype=float), (n,)).copy()
        self.b = np.broadcast_to(np.asarray(b, dtype=float), (n,)).copy()
        if self.dst.size != n:
            raise ValueError("src and dst must have the same length")
        if n and check:
            if np.any(self.src == self.dst):
                raise ValueError("self-links are not allowed")
            for name in ("rest", "k", "b"):
                arr = getattr(self, name)
                if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                    raise ValueError(f"link {name} must be finite and non-negative")
            keys = self.src.astype(np.int64) * (int(max(self.src.max(), self.dst.max())) + 1) + self.dst
            if np.unique(keys).size != n:
                raise ValueError("duplicate (src, dst) link")

    @classmethod
    def from_links(cls, links: Iterable[SpringLink]) -> "LinkSet":
        links = list(links)
        return cls(
            [l.src for l in links],
            [l.dst for l in links],
            [l.rest_length for l in links],
            [l.k for l in links],
            [l.b for l in links],
        )

    @classmethod
    def concat(cls, parts: Sequence["LinkSet"]) -> "LinkSet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls()
        return cls(
            np.concatenate([p.src for p in parts]),
            np.concatenate([p.dst for p in parts]),
            np.concatenate([p.rest for p in parts]),
            np.concatenate([p.k for p in parts]),
            np.concatenate([p.b for p in parts]),
        )

    @property
    def links(self) -> list[SpringLink]:
        return [
            SpringLink(int(s), int(d), float(r), float(k), float(b))
            for s, d, r, k, b in zip(self.src, self.dst, self.rest, self.k, self.b)
        ]

    def neighbors(self, agent_id: int) -> list[int]:
        """The neighbor set M_i: targets of links acting on ``agent_id``."""
        return [int(j) for j in self.dst[self.src == agent_id]]

    def __len__(self) -> int:
        return int(self.src.size)

    def __iter__(self):
        return iter(self.links)

    def __repr__(self) -> str:
        return f"LinkSet(n={len(self)})"


@dataclass
class World:
    """Agent positions, velocities and masses at one step of the clock.

    Agent ids are the row indices ``0..n-1``.
    """

    positions: np.ndarray
    velocities: np.ndarray = None
    masses: np.ndarray = None
    time: int = 0

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float).reshape(-1, 2)
        n = len(self.positions)
        if self.velocities is None:
            self.velocities = np.zeros((n, 2))
        else:
            self.velocities = np.array(self.velocities, dtype=float).reshape(-1, 2)
        if self.masses is None:
            self.masses = np.ones(n)
        else:
            self.masses = np.array(self.masses, dtype=float).reshape(-1)
        if self.velocities.shape != (n, 2) or self.masses.shape != (n,):
            raise ValueError("positions, velocities and masses disagree on agent count")
        if np.any(~(self.masses > 0)):
            raise ValueError("all masses must be positive")

    @classmethod
    def from_agents(cls, agents: Sequence[AgentState], time: int = 0) -> "World":
        for expected, a in enumerate(agents):
            if a.id != expected:
                raise ValueError(f"agent ids must be 0..n-1 in order; got {a.id} at {expected}")
        return cls(
            [a.position for a in agents],
            [a.velocity for a in agents],
            [a.mass for a in agents],
            time,
        )

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def agents(self) -> list[AgentState]:
        return [
            AgentState(i, self.positions[i].copy(), self.velocities[i].copy(), float(self.masses[i]))
            for i in range(self.n)
        ]

    def copy(self) -> "World":
        return World(self.positions.copy(), self.velocities.copy(), self.masses.copy(), self.time)


@dataclass(frozen=True)
class SimParams:
    """Integration settings. ``sensing_range=None`` means unlimited."""

    dt: float = 1.0
    sensing_range: float | None = None
    default_k: float = DEFAULT_K
    default_b: float = DEFAULT_B
    max_speed: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.sensing_range is not None and not self.sensing_range > 0:
            raise ValueError("sensing_range must be positive when finite")
        if self.max_speed is not None and not self.max_speed > 0:
            raise ValueError("max_speed must be positive when set")


def separation_direction(i: int, j: int) -> np.ndarray:
    """Unit vector used as ``x_ij`` direction when agents i and j coincide.

    Derived from a hash of the sorted id pair, so ``dir(i, j) == -dir(j, i)``.
    """
    lo, hi = (i, j) if i < j else (j, i)
    h = SplitMix64(((lo & 0xFFFFFFFF) << 32) | (hi & 0xFFFFFFFF)).next() >> 32
    theta = 2.0 * math.pi * h / 2.0**32
    u = np.array([math.cos(theta), math.sin(theta)])
    return u if i < j else -u


def displacement_vector(pos_i, pos_j, rest_length: float, ids: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Hookean displacement of i relative to j: ``(|x_ij| - L) * x_ij / |x_ij|``.

    ``ids`` only matters when the positions coincide.
    """
    xij = np.asarray(pos_i, dtype=float) - np.asarray(pos_j, dtype=float)
    dist = math.hypot(xij[0], xij[1])
    if dist < COINCIDENT_EPS:
        return (dist - rest_length) * separation_direction(*ids)
    return (dist - rest_length) * (xij / dist)


def pair_force(link: SpringLink, state_i: AgentState, state_j: AgentState) -> np.ndarray:
    if link.src != state_i.id or link.dst != state_j.id:
        raise ValueError("link endpoints do not match the given agents")
    d = displacement_vector(state_i.position, state_j.position, link.rest_length, (link.src, link.dst))
    return -link.k * d - link.b * (np.asarray(state_i.velocity, float) - np.asarray(state_j.velocity, float))


def link_forces(positions: np.ndarray, velocities: np.ndarray, links: LinkSet) -> np.ndarray:
    """Per-link force on each link's source agent, shape (n_links, 2)."""
    if not len(links):
        return np.zeros((0, 2))
    xij = positions[links.src] - positions[links.dst]
    dist = np.hypot(xij[:, 0], xij[:, 1])
    close = dist < COINCIDENT_EPS
    if close.any():
        unit = np.empty_like(xij)
        far = ~close
        unit[far] = xij[far] / dist[far, None]
        for idx in np.flatnonzero(close):
            unit[idx] = separation_direction(int(links.src[idx]), int(links.dst[idx]))
    else:
        unit = xij / dist[:, None]
    stretch = (dist - links.rest)[:, None] * unit
    vij = velocities[links.src] - velocities[links.dst]
    return -links.k[:, None] * stretch - links.b[:, None] * vij


def net_forces(world: World, links: LinkSet) -> np.ndarray:
    """Net spring-damper force on every agent, shape (n, 2).

    Each agent's contributions are accumulated in link order.
    """
    f = link_forces(world.positions, world.velocities, links)
    out = np.zeros((world.n, 2))
    if len(links):
        out[:, 0] = np.bincount(links.src, weights=f[:, 0], minlength=world.n)
        out[:, 1] = np.bincount(links.src, weights=f[:, 1], minlength=world.n)
    return out


def net_force(agent_id: int, world: World, links: LinkSet) -> np.ndarray:
    if not 0 <= agent_id < world.n:
        raise IndexError(f"agent {agent_id} not in world of {world.n}")
    return net_forces(world, links)[agent_id]


def integrate_step(
    world: World,
    links: LinkSet,
    params: SimParams,
    external_forces: Mapping[int, Sequence[float]] | None = None,
) -> World:
    """Advance the world by one step, returning a new World.

    All forces are evaluated on the time-t buffer before anything is written.
    """
    force = net_forces(world, links)
    if external_forces:
        for i, f in external_forces.items():
            force[i] += f
    vel = world.velocities + params.dt * force / world.masses[:, None]
    if params.max_speed is not None:
        speed = np.hypot(vel[:, 0], vel[:, 1])
        over = speed > params.max_speed
        if over.any():
            vel[over] *= (params.max_speed / speed[over])[:, None]
    pos = world.positions + params.dt * vel
    bad = ~(np.isfinite(pos).all(axis=1) & np.isfinite(vel).all(axis=1))
    if bad.any():
        raise NumericalDivergence(int(np.flatnonzero(bad)[0]), world.time + 1)
    return World(pos, vel, world.masses, world.time + 1)


def kinetic_energy(world: World) -> float:
    v2 = (world.velocities * world.velocities).sum(axis=1)
    return float(0.5 * (world.masses * v2).sum())


def spring_energy(world: World, links: LinkSet) -> float:
    """Sum of ``k/2 (|x_ij| - L)^2`` over links."""
    if not len(links):
        return 0.0
    xij = world.positions[links.src] - world.positions[links.dst]
    dist = np.hypot(xij[:, 0], xij[:, 1])
    return float(0.5 * (links.k * (dist - links.rest) ** 2).sum())


def max_speed(world: World) -> float:
    if world.n == 0:
        return 0.0
    return float(np.hypot(world.velocities[:, 0], world.velocities[:, 1]).max())
