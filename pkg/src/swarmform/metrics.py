"""Formation-quality measures over World snapshots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import LinkSet, World
from .topology import component_labels, connected_components


class NoLinksError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorStats:
    mean_abs_error: float
    max_abs_error: float
    rms_error: float


@dataclass(frozen=True)
class LineFit:
    eigen_ratio: float
    rms_perpendicular: float
    length: float


def link_residuals(world: World, links: LinkSet) -> np.ndarray:
    """``|x_src - x_dst| - rest`` per link (signed)."""
    xij = world.positions[links.src] - world.positions[links.dst]
    return np.hypot(xij[:, 0], xij[:, 1]) - links.rest


def neighbor_distance_error(world: World, links: LinkSet) -> ErrorStats:
    if not len(links):
        raise NoLinksError("no links to measure")
    err = np.abs(link_residuals(world, links))
    return ErrorStats(float(err.mean()), float(err.max()), float(np.sqrt((err * err).mean())))


def collinearity(world: World) -> LineFit:
    """Principal-axis fit of all positions.

    Uses the population covariance (divide by n). ``eigen_ratio`` is
    ``lambda_min / lambda_max``: 0 for a perfect line, 1 for an isotropic cloud.
    """
    if world.n < 2:
        raise ValueError("collinearity needs at least two agents")
    pos = world.positions
    centered = pos - pos.mean(axis=0)
    cov = centered.T @ centered / len(pos)
    evals, evecs = np.linalg.eigh(cov)
    lam_min, lam_max = max(evals[0], 0.0), max(evals[1], 0.0)
    if lam_max <= 0.0 or lam_max <= 1e-300:
        return LineFit(0.0, 0.0, 0.0)
    proj = centered @ evecs[:, 1]
    return LineFit(
        float(min(lam_min / lam_max, 1.0)),
        float(np.sqrt(lam_min)),
        float(proj.max() - proj.min()),
    )


def component_count(world: World, range_: float) -> int:
    return len(connected_components(world, range_))


def count_components(positions: np.ndarray, range_: float) -> int:
    labels = component_labels(positions, range_)
    return int(np.count_nonzero(labels == np.arange(len(labels))))


def is_converged(speed_history: Sequence[float], v_tol: float, window: int) -> bool:
    """True iff the last ``window`` max-speeds are all below ``v_tol``."""
    if not v_tol > 0 or window < 1:
        raise ValueError("v_tol must be positive and window at least 1")
    if len(speed_history) < window:
        return False
    return all(s < v_tol for s in list(speed_history)[-window:])
