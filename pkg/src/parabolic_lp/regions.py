"""Grid samples inside parabolic cubes.

Lattice cubes are half-open boxes ``[k s, (k+1) s)`` so that one scale tiles
the domain without double counting.  Balls are gathered from their bounding
box and masked with ``|z - center|_a < radius``.  Periodic grids wrap indices.
"""
from __future__ import annotations

from collections import defaultdict

import numpy as np

from .field import Grid
from .geometry import ParabolicCube, aniso_distance

_EPS = 1e-9


def _axis_indices(grid: Grid, ax: int, start: float, stop: float, closed: bool) -> np.ndarray:
    lo, h, n = grid.box.lower[ax], grid.spacing[ax], grid.dims[ax]
    k0 = int(np.ceil((start - lo) / h - _EPS))
    if closed:
        k1 = int(np.floor((stop - lo) / h + _EPS)) + 1
    else:
        k1 = int(np.ceil((stop - lo) / h - _EPS))
    if grid.periodic:
        k1 = min(k1, k0 + n)
        return np.arange(k0, k1) % n
    return np.arange(max(k0, 0), min(k1, n))


def cube_samples(values: np.ndarray, grid: Grid, cube: ParabolicCube) -> np.ndarray:
    """Flat array of the samples of ``values`` lying in ``cube``."""
    a = grid.anisotropy
    lo, hi = cube.bounds(a)
    closed = cube.kind == "ball"
    idx = [_axis_indices(grid, ax, lo[ax], hi[ax], closed) for ax in range(grid.ndim)]
    if any(len(i) == 0 for i in idx):
        return np.empty(0)
    block = values[np.ix_(*idx)]
    if cube.kind == "lattice":
        return block.ravel()
    # unwrapped physical offsets from the centre
    offs = []
    for ax in range(grid.ndim):
        k0 = int(np.ceil((lo[ax] - grid.box.lower[ax]) / grid.spacing[ax] - _EPS))
        k = np.arange(k0, k0 + len(idx[ax])) if grid.periodic else idx[ax]
        offs.append(grid.box.lower[ax] + k * grid.spacing[ax] - cube.center[ax])
    d = np.stack(np.meshgrid(*offs, indexing="ij"), axis=-1)
    mask = aniso_distance(d, a) < cube.radius
    return block[mask]


def lattice_groups(cubes) -> tuple[dict, list]:
    """Splits cubes into lattice cubes grouped by scale and the remaining balls."""
    groups = defaultdict(list)
    balls = []
    for c in cubes:
        if c.kind == "lattice":
            groups[c.scale].append(c)
        else:
            balls.append(c)
    return dict(groups), balls


def lattice_stack(values: np.ndarray, grid: Grid, cubes) -> np.ndarray | None:
    """Samples of equally sized lattice cubes stacked as ``(n_cubes, points)``.

    Returns None when the cubes of the group do not all hold the same number
    of samples per axis (unaligned lattice); callers then fall back to a loop.
    """
    a = grid.anisotropy
    per_axis = [[] for _ in range(grid.ndim)]
    for c in cubes:
        lo, hi = c.bounds(a)
        for ax in range(grid.ndim):
            per_axis[ax].append(_axis_indices(grid, ax, lo[ax], hi[ax], closed=False))
    idx = []
    for ax in range(grid.ndim):
        lens = {len(i) for i in per_axis[ax]}
        if len(lens) != 1 or 0 in lens:
            return None
        idx.append(np.stack(per_axis[ax]))
    n = len(cubes)
    index = []
    for ax in range(grid.ndim):
        shape = [n] + [1] * grid.ndim
        shape[ax + 1] = idx[ax].shape[1]
        index.append(idx[ax].reshape(shape))
    return values[tuple(index)].reshape(n, -1)


class CubePlan:
    """Precomputed gathers for a fixed cube family on a fixed grid.

    ``stacks`` maps a lattice scale to an index tuple whose gather has shape
    ``(n_cubes, points)``; ``singles`` holds per-cube flat index arrays for
    cubes that cannot be stacked (balls, unaligned lattice cubes); ``empty``
    counts cubes holding no grid point.
    """

    def __init__(self, grid: Grid, cubes):
        self.grid = grid
        self.n_cubes = len(cubes)
        groups, balls = lattice_groups(cubes)
        self.stacks = {}
        self.singles = []
        self.empty = 0
        flat = np.arange(grid.size).reshape(grid.dims)
        for scale, cs in sorted(groups.items()):
            st = lattice_stack(flat, grid, cs)
            if st is not None:
                self.stacks[int(scale)] = st
            else:
                for c in cs:
                    self._add_single(flat, c)
        for c in balls:
            self._add_single(flat, c)

    def _add_single(self, flat, cube):
        idx = cube_samples(flat, self.grid, cube)
        if idx.size == 0:
            self.empty += 1
        else:
            self.singles.append((cube, idx))


_PLANS: dict = {}


def cube_plan(grid: Grid, policy) -> CubePlan:
    """Cached :class:`CubePlan` for the sampler family of ``policy`` on ``grid``'s box."""
    from .geometry import cube_sampler

    key = (grid, policy)
    plan = _PLANS.get(key)
    if plan is None:
        if len(_PLANS) > 64:
            _PLANS.clear()
        plan = CubePlan(grid, cube_sampler(grid.box, grid.anisotropy, policy, grid.spacing))
        _PLANS[key] = plan
    return plan
