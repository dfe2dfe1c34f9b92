"""
Initial maps for flow runs.

Builds the starting MapField from a RunConfig: an affine part plus explicit
and seeded random Fourier modes, a Lagrangian map from a potential, or a
saved snapshot. Random data use numpy's default_rng(seed), so a config and
seed always produce the same field.
"""

from dataclasses import dataclass
from itertools import product
from typing import List, Sequence, Tuple

import numpy as np

from src.config.settings import FourierMode, PotentialMode, RunConfig
from src.geometry.rescaling import normalize_to_area_decreasing
from src.lagrangian.potential import LagrangianData, from_lagrangian_data
from src.models.fields import MapField, PeriodicGrid
from src.storage.snapshots import load_snapshot
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class InitialData:
    """Starting point of a run."""
    field: MapField
    t: float = 0.0
    step_count: int = 0
    scale: float = 1.0


def _phase(grid: PeriodicGrid, k: Sequence[int]) -> np.ndarray:
    x1, x2 = grid.coordinates()
    return 2 * np.pi * (k[0] * x1 / grid.L1 + k[1] * x2 / grid.L2)


def _wavenumber(grid: PeriodicGrid, k: Sequence[int]) -> float:
    return float(np.hypot(2 * np.pi * k[0] / grid.L1, 2 * np.pi * k[1] / grid.L2))


def fourier_mode_field(grid: PeriodicGrid, k: Sequence[int], cos: Sequence[float],
                       sin: Sequence[float], m: int) -> np.ndarray:
    """One mode cos_a cos(k.x) + sin_a sin(k.x) per component, shape (m, n1, n2)."""
    phase = _phase(grid, k)
    cos = np.zeros(m) if len(cos) == 0 else np.asarray(cos, dtype=float)
    sin = np.zeros(m) if len(sin) == 0 else np.asarray(sin, dtype=float)
    return cos[:, None, None] * np.cos(phase) + sin[:, None, None] * np.sin(phase)


def modes_field(grid: PeriodicGrid, modes: List[FourierMode], m: int) -> np.ndarray:
    u = np.zeros((m, grid.n1, grid.n2))
    for mode in modes:
        u += fourier_mode_field(grid, mode.k, mode.cos, mode.sin, m)
    return u


def potential_field(grid: PeriodicGrid, modes: List[PotentialMode]) -> np.ndarray:
    phi = np.zeros(grid.shape)
    for mode in modes:
        phase = _phase(grid, mode.k)
        phi += mode.cos * np.cos(phase) + mode.sin * np.sin(phase)
    return phi


def half_plane_modes(cutoff: int) -> List[Tuple[int, int]]:
    """Nonzero (k1, k2) with max(|k1|, |k2|) <= cutoff, one of each +-k pair."""
    return [
        (k1, k2)
        for k1, k2 in product(range(0, cutoff + 1), range(-cutoff, cutoff + 1))
        if k1 > 0 or k2 > 0
    ]


def random_modes(grid: PeriodicGrid, m: int, cutoff: int, amplitude: float,
                 rng: np.random.Generator, derivative_order: int = 1) -> np.ndarray:
    """
    Seeded random Fourier series, shape (m, n1, n2).

    Coefficients are normal draws rescaled so that the sum over modes of
    |k|^derivative_order (|cos| + |sin|) equals amplitude, which bounds the
    sup norm of that derivative of the result by amplitude.
    """
    u = np.zeros((m, grid.n1, grid.n2))
    if cutoff == 0 or amplitude == 0.0:
        return u

    modes = half_plane_modes(cutoff)
    coefficients = rng.standard_normal((len(modes), 2, m))
    weights = np.array([_wavenumber(grid, k) ** derivative_order for k in modes])
    budget = float(np.sum(weights[:, None, None] * np.abs(coefficients)))
    coefficients *= amplitude / budget

    for k, (c, s) in zip(modes, coefficients):
        u += fourier_mode_field(grid, k, c, s, m)
    return u


def build_initial_field(cfg: RunConfig) -> InitialData:
    """
    Construct the starting map described by cfg.

    Raises:
        SnapshotFormatError: if a snapshot-file map cannot be read
    """
    map_cfg = cfg.map
    m = map_cfg.codim
    rng = np.random.default_rng(cfg.seed)

    if map_cfg.kind == "snapshot-file":
        loaded = load_snapshot(map_cfg.path)
        if loaded.field.grid != PeriodicGrid(cfg.grid.n1, cfg.grid.n2, cfg.grid.L1, cfg.grid.L2):
            logger.warning(f"Using the grid stored in {map_cfg.path}, not the configured one")
        logger.info(f"Resuming from {map_cfg.path} at t = {loaded.t:.6g}")
        return InitialData(loaded.field, loaded.t, loaded.step_count)

    grid = PeriodicGrid(cfg.grid.n1, cfg.grid.n2, cfg.grid.L1, cfg.grid.L2)

    if map_cfg.kind == "potential":
        Q = np.zeros((2, 2)) if map_cfg.Q is None else np.asarray(map_cfg.Q, dtype=float)
        phi = potential_field(grid, map_cfg.potential_modes)
        phi += random_modes(grid, 1, map_cfg.random_cutoff, map_cfg.random_amplitude, rng,
                            derivative_order=2)[0]
        field = from_lagrangian_data(grid, LagrangianData(Q=Q, phi=phi))
    else:
        affine = np.zeros((m, 2)) if map_cfg.affine is None else np.asarray(map_cfg.affine, dtype=float)
        offset = np.zeros(m) if map_cfg.offset is None else np.asarray(map_cfg.offset, dtype=float)
        u = modes_field(grid, map_cfg.modes, m)
        u += random_modes(grid, m, map_cfg.random_cutoff, map_cfg.random_amplitude, rng)
        field = MapField(grid, affine, offset, u)

    scale = 1.0
    if map_cfg.normalize and m == 2:
        field, scale = normalize_to_area_decreasing(field, cfg.checks.alpha_margin)
    elif map_cfg.normalize:
        logger.warning("map.normalize has no effect for codim 1 (lambda2 = 0)")
    return InitialData(field, 0.0, 0, scale)
