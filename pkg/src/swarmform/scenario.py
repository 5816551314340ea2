"""
Scenario configuration, seeded initialisation, the run loop and file output.

A run is fully determined by its ScenarioConfig: same config, same bytes on
disk.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .behaviors import (
    ControlOutput,
    LineControllerState,
    LineParams,
    dispersion_controller,
    line_controller,
)
from .dynamics import DEFAULT_B, DEFAULT_K, SimParams, World, integrate_step, max_speed
from .metrics import collinearity, count_components, is_converged, neighbor_distance_error
from .rng import Xoshiro256StarStar

BEHAVIORS = ("dispersion", "line")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OutputConfig:
    """Where files go. ``None`` for a file name disables that file."""

    dir: str | None = None
    trajectory: str | None = "trajectory.csv"
    metrics: str | None = "metrics.json"


@dataclass(frozen=True)
class ScenarioConfig:
    behavior: str = "dispersion"
    n_agents: int = 50
    region: tuple[float, float] = (100.0, 100.0)
    seed: int = 0
    L_d: float = 10.0
    epsilon: float = 0.5
    line_spacing: float | None = None       # None -> L_d
    sensing_range: float | None = None      # None -> unlimited
    k: float = DEFAULT_K
    b: float = DEFAULT_B
    dt: float = 1.0
    leader_force: float | None = None       # None -> 0.5 * k * L_d
    max_speed: float | None = None
    max_steps: int = 5000
    v_tol: float | None = None              # None -> 1e-3 * L_d
    window: int = 50
    topology_refresh_every: int = 1
    sample_every: int = 1
    symmetric_links: bool = True
    pair_close_factor: float = 2.0
    chain_residual_frac: float = 0.2
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def spacing(self) -> float:
        return self.L_d if self.line_spacing is None else self.line_spacing

    @property
    def leader_force_value(self) -> float:
        return 0.5 * self.k * self.spacing if self.leader_force is None else self.leader_force

    @property
    def v_tol_value(self) -> float:
        return 1e-3 * self.L_d if self.v_tol is None else self.v_tol

    def problems(self) -> list[str]:
        """Every violated invariant, as readable messages."""
        out = []
        if self.behavior not in BEHAVIORS:
            out.append(f"behavior must be one of {BEHAVIORS}, got {self.behavior!r}")
        if not isinstance(self.n_agents, int) or self.n_agents < 1:
            out.append("n_agents must be an integer >= 1")
        elif self.behavior == "line" and self.n_agents < 2:
            out.append("line behavior needs n_agents >= 2")
        if len(self.region) != 2 or not all(_pos(v) for v in self.region):
            out.append("region must be two positive numbers")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        for name in ("L_d", "epsilon", "k", "dt"):
            if not _pos(getattr(self, name)):
                out.append(f"{name} must be positive")
        if not (isinstance(self.b, (int, float)) and math.isfinite(self.b) and self.b >= 0):
            out.append("b must be non-negative")
        for name in ("line_spacing", "sensing_range", "leader_force", "max_speed", "v_tol"):
            val = getattr(self, name)
            if val is not None and not _pos(val):
                out.append(f"{name} must be positive or null")
        if _pos(self.epsilon) and _pos(self.spacing) and not self.epsilon < self.spacing:
            out.append("epsilon must be smaller than L_d / line_spacing")
        for name in ("max_steps", "window", "topology_refresh_every", "sample_every"):
            val = getattr(self, name)
            if not isinstance(val, int) or val < 1:
                out.append(f"{name} must be an integer >= 1")
        for name in ("pair_close_factor", "chain_residual_frac"):
            if not _pos(getattr(self, name)):
                out.append(f"{name} must be positive")
        return out

    def validate(self) -> "ScenarioConfig":
        errs = self.problems()
        if errs:
            raise ConfigError("; ".join(errs))
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["region"] = list(self.region)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(data)
        if "region" in data:
            region = data["region"]
            if not isinstance(region, (list, tuple)) or len(region) != 2:
                raise ConfigError("region must be [width, height]")
            try:
                data["region"] = tuple(float(v) for v in region)
            except (TypeError, ValueError):
                raise ConfigError("region values must be numbers") from None
        if "output" in data:
            out = data["output"] or {}
            if not isinstance(out, dict):
                raise ConfigError("output must be an object")
            bad = sorted(set(out) - {f.name for f in dataclasses.fields(OutputConfig)})
            if bad:
                raise ConfigError(f"unknown output keys: {', '.join(bad)}")
            data["output"] = OutputConfig(**out)
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def sim_params(self) -> SimParams:
        return SimParams(self.dt, self.sensing_range, self.k, self.b, self.max_speed)

    def line_params(self) -> LineParams:
        return LineParams(
            epsilon=self.epsilon,
            spacing=self.spacing,
            leader_force=self.leader_force_value,
            spring_k=self.k,
            damping_b=self.b,
            sensing_range=self.sensing_range,
            pair_close_factor=self.pair_close_factor,
            chain_residual_frac=self.chain_residual_frac,
        )


def _pos(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0


def init_world(config: ScenarioConfig) -> World:
    """Uniform random positions over the region, at rest, unit masses.

    Draw order is agent 0 x, agent 0 y, agent 1 x, ... from xoshiro256**.
    """
    rng = Xoshiro256StarStar(config.seed)
    width, height = config.region
    pos = np.empty((config.n_agents, 2))
    for i in range(config.n_agents):
        pos[i, 0] = width * rng.random()
        pos[i, 1] = height * rng.random()
    return World(pos)


@dataclass
class RunResult:
    config: ScenarioConfig
    final_world: World
    steps_executed: int
    converged: bool
    metrics_series: list[dict[str, Any]]
    summary: dict[str, Any]
    sample_steps: list[int]
    positions: list[np.ndarray]
    velocities: list[np.ndarray]
    forced_agents: list[int]
    final_links: Any = None


class _Controller:
    """Adapts the two behaviors to one call signature for the run loop."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.line_state = LineControllerState()
        self.line_params = config.line_params() if config.behavior == "line" else None

    def __call__(self, world: World) -> ControlOutput:
        c = self.config
        if c.behavior == "dispersion":
            return dispersion_controller(
                world, c.L_d, c.sensing_range,
                spring_k=c.k, damping_b=c.b, symmetric=c.symmetric_links,
            )
        if world.n < 2:
            raise ConfigError("line behavior needs at least two agents")
        out, self.line_state = line_controller(world, self.line_state, self.line_params)
        return out


def _record(config: ScenarioConfig, world: World, out: ControlOutput) -> dict[str, Any]:
    err = neighbor_distance_error(world, out.links).mean_abs_error if len(out.links) else None
    ratio = collinearity(world).eigen_ratio if world.n >= 2 else None
    if config.sensing_range is None:
        comps = 1 if world.n else 0
    else:
        comps = count_components(world.positions, config.sensing_range)
    return {
        "step": world.time,
        "max_speed": max_speed(world),
        "mean_abs_error": err,
        "eigen_ratio": ratio,
        "component_count": comps,
        "phase_label": out.phase_label,
    }


def run(config: ScenarioConfig, world: World | None = None) -> RunResult:
    """Simulate until converged or ``max_steps``.

    ``world`` overrides the seeded initial placement (scripted scenarios).
    Each sample records the state at that step together with the control
    decision taken from it; the final state is always sampled.
    """
    config.validate()
    params = config.sim_params()
    world = init_world(config) if world is None else world.copy()
    controller = _Controller(config)
    speeds: deque[float] = deque(maxlen=config.window)
    series, steps, positions, velocities = [], [], [], []
    forced: set[int] = set()
    v_tol = config.v_tol_value
    converged = False
    out = None

    def sample(w: World, o: ControlOutput):
        series.append(_record(config, w, o))
        steps.append(w.time)
        positions.append(w.positions.copy())
        velocities.append(w.velocities.copy())

    for step in range(config.max_steps):
        if config.behavior == "line" or out is None or step % config.topology_refresh_every == 0:
            out = controller(world)
        forced.update(i for i, f in out.external_forces.items() if np.any(np.asarray(f) != 0))
        if step % config.sample_every == 0:
            sample(world, out)
        world = integrate_step(world, out.links, params, out.external_forces)
        speeds.append(max_speed(world))
        if is_converged(speeds, v_tol, config.window):
            converged = True
            break

    final_out = controller(world)
    sample(world, final_out)
    last = series[-1]
    summary = {
        "converged": converged,
        "steps": world.time,
        "final_mean_abs_error": last["mean_abs_error"],
        "final_eigen_ratio": last["eigen_ratio"],
        "final_component_count": last["component_count"],
        "final_phase": last["phase_label"],
        "forced_agents": sorted(forced),
    }
    return RunResult(
        config=config,
        final_world=world,
        steps_executed=world.time,
        converged=converged,
        metrics_series=series,
        summary=summary,
        sample_steps=steps,
        positions=positions,
        velocities=velocities,
        forced_agents=sorted(forced),
        final_links=final_out.links,
    )


def trajectory_csv(result: RunResult) -> str:
    lines = ["step,agent_id,x,y,vx,vy"]
    for step, pos, vel in zip(result.sample_steps, result.positions, result.velocities):
        for i in range(len(pos)):
            lines.append(
                f"{step},{i},{pos[i, 0]:.9g},{pos[i, 1]:.9g},{vel[i, 0]:.9g},{vel[i, 1]:.9g}"
            )
    return "\n".join(lines) + "\n"


def metrics_document(result: RunResult) -> dict[str, Any]:
    s = result.summary
    return {
        "config": result.config.to_dict(),
        "summary": {
            "converged": s["converged"],
            "steps": s["steps"],
            "final_mean_abs_error": s["final_mean_abs_error"],
            "final_eigen_ratio": s["final_eigen_ratio"],
            "final_component_count": s["final_component_count"],
            "final_phase": s["final_phase"],
            "forced_agents": s["forced_agents"],
        },
        "series": result.metrics_series,
    }


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_trajectory(result: RunResult, path) -> Path:
    """CSV ``step,agent_id,x,y,vx,vy``, 9 significant digits, rows by (step, agent)."""
    return _write(path, trajectory_csv(result))


def write_metrics(result: RunResult, path) -> Path:
    return _write(path, json.dumps(metrics_document(result), indent=2) + "\n")


def write_outputs(result: RunResult, out_dir=None) -> list[Path]:
    """Write whichever files the config's output section enables."""
    out = result.config.output
    base = Path(out_dir if out_dir is not None else (out.dir or "."))
    written = []
    if out.trajectory:
        written.append(write_trajectory(result, base / out.trajectory))
    if out.metrics:
        written.append(write_metrics(result, base / out.metrics))
    return written
