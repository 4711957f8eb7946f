"""Shared builders for the test suite."""
import numpy as np

from parabolic_lp.field import Field, Grid

STD_LOWER = (-8.0, -2.0)
STD_UPPER = (8.0, 2.0)


def std_grid(n=256, anisotropy="parabolic"):
    return Grid.regular((n, n), STD_LOWER, STD_UPPER, anisotropy)


def random_band_limited(grid, rng, kmax=6, mean_zero=True):
    """Random real field with wave numbers |k_i| <= kmax."""
    spec = np.zeros(grid.dims, dtype=complex)
    for _ in range(12):
        k = tuple(int(rng.integers(-kmax, kmax + 1)) for _ in grid.dims)
        c = rng.normal() + 1j * rng.normal()
        spec[tuple(ki % d for ki, d in zip(k, grid.dims))] += c
        spec[tuple(-ki % d for ki, d in zip(k, grid.dims))] += np.conj(c)
    if mean_zero:
        spec[(0,) * grid.ndim] = 0
    vals = np.fft.ifftn(spec).real * grid.size / 4
    return Field(grid, vals)


def random_smooth(grid, rng):
    """Sum of a few smooth periodic modes with a random mean."""
    return Field(grid, random_band_limited(grid, rng, 4).values + rng.normal())


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def acceptance_line(number, title, passed, detail=""):
    ACCEPTANCE_LINES.append((number, f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"))
