"""Estimator-style wrappers (``fit`` / ``transform`` / ``get_params``).

The operators of the package act on one field at a time, so "fit" means
binding to a grid (building the symbol bank, the extension matrices, or a
family's constant) rather than learning from a sample matrix.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError, DataError, StructuralError
from .extension import (build_plateau_cutoff, default_plateau_sets, extend_to_box,
                        extension_coefficients, localize)
from .field import Field, Grid, VectorField, mean_subtract
from .littlewood_paley import build_symbol_bank, lp_decompose

__all__ = ["check_field", "LittlewoodPaleyDecomposer", "ReflectionExtender", "ConstantFitter"]


def check_field(X, grid: Grid | None = None, periodic: bool | None = None) -> Field:
    """Validates ``X`` and returns it as a :class:`Field`.

    ``X`` may be a Field or an array (then ``grid`` is required).  Raises
    :class:`DataError` on non-finite samples and :class:`StructuralError` on
    shape, grid or periodicity mismatches.
    """
    if isinstance(X, VectorField):
        raise StructuralError("expected a scalar field; pass the components one at a time")
    if isinstance(X, Field):
        f = X
        if grid is not None and f.grid != grid:
            raise StructuralError("field grid differs from the fitted grid")
    else:
        if grid is None:
            raise StructuralError("an array input needs a grid")
        arr = np.asarray(X, dtype=float)
        if arr.shape != tuple(grid.dims):
            raise StructuralError(f"array shape {arr.shape} does not match grid dims {grid.dims}")
        f = Field(grid, arr)
    if not np.all(np.isfinite(f.values)):
        raise DataError("field contains NaN or Inf")
    if periodic is not None and f.grid.periodic != periodic:
        kind = "periodic" if periodic else "closure (periodic=False)"
        raise StructuralError(f"expected a field on a {kind} grid")
    return f


class LittlewoodPaleyDecomposer(TransformerMixin, BaseEstimator):
    """Dyadic blocks of a field.

    ``fit`` builds the symbol bank of the field's grid; ``transform`` returns
    the blocks stacked as ``(n_blocks, *dims)``; ``inverse_transform`` sums
    them back.

    Parameters
    ----------
    mode : {"homogeneous", "inhomogeneous"}
    subtract_mean : bool
        Remove the mean before a homogeneous decomposition (the zero
        frequency carries no block).
    """

    def __init__(self, mode: str = "homogeneous", subtract_mean: bool = True):
        self.mode = mode
        self.subtract_mean = subtract_mean

    def fit(self, X, y=None):
        f = check_field(X, periodic=True)
        if self.mode not in ("homogeneous", "inhomogeneous"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        self.grid_ = f.grid
        self.bank_ = build_symbol_bank(f.grid, mode=self.mode)
        self.js_ = list(self.bank_.js)
        return self

    def decompose(self, X):
        """Full :class:`LPDecomposition` (blocks, residual, zero mode)."""
        check_is_fitted(self, "bank_")
        f = check_field(X, self.grid_)
        if self.mode == "homogeneous" and self.subtract_mean:
            f = mean_subtract(f)
        return lp_decompose(f, self.bank_)

    def transform(self, X):
        return self.decompose(X).block_array()

    def inverse_transform(self, B):
        check_is_fitted(self, "bank_")
        B = np.asarray(B)
        if B.shape != (len(self.js_),) + tuple(self.grid_.dims):
            raise StructuralError("block array does not match the fitted bank")
        return Field(self.grid_, B.sum(axis=0))


class ReflectionExtender(TransformerMixin, BaseEstimator):
    """Higher-order reflection of a field on a box to the box three times larger.

    With ``localize=True`` the output is ``Psi f~`` on the zero-padded periodic
    embedding (the input of the antiderivative step).

    Parameters
    ----------
    m : int
        Sobolev order; ``2m`` reflections in space and ``m`` in time.
    localize : bool
    degree : int, optional
        Interpolation degree for off-grid reflected points (default ``2m+1``).
    """

    def __init__(self, m: int = 1, localize: bool = False, degree: int | None = None):
        self.m = m
        self.localize = localize
        self.degree = degree

    def fit(self, X, y=None):
        f = check_field(X, periodic=False)
        if int(self.m) < 1:
            raise ConfigurationError("m must be >= 1")
        self.grid_ = f.grid
        self.space_coefficients_ = extension_coefficients(2 * int(self.m))
        self.time_coefficients_ = extension_coefficients(int(self.m))
        return self

    def transform(self, X):
        check_is_fitted(self, "grid_")
        f = check_field(X, self.grid_)
        ext = extend_to_box(f, int(self.m), degree=self.degree)
        if not self.localize:
            return ext
        Z1, Z2 = default_plateau_sets(self.grid_.box)
        psi = build_plateau_cutoff(Z1, Z2, ext.grid)
        self.localization_ = localize(ext, psi)
        return self.localization_.product


class ConstantFitter(BaseEstimator):
    """Empirical constant of an inequality over a list of samples.

    ``fit`` evaluates ``inequality`` on every sample and keeps the family
    maximum ``C_max_``; ``score`` is the fraction of new samples satisfying
    the inequality with ``margin * C_max_``.

    Parameters
    ----------
    inequality : str
        Inequality id (see ``parabolic_lp.lab.inequalities.IDS``).
    options : LabOptions, optional
    margin : float
    """

    def __init__(self, inequality: str = "thm1.1", options=None, margin: float = 1.5):
        self.inequality = inequality
        self.options = options
        self.margin = margin

    def _records(self, samples):
        from .lab.inequalities import eval_inequality
        samples = list(samples)
        if not samples:
            raise ConfigurationError("no samples")
        return [eval_inequality(self.inequality, s, options=self.options) for s in samples]

    def fit(self, samples, y=None):
        from .lab.inequalities import fit_constant
        self.records_ = self._records(samples)
        self.summary_ = fit_constant([r["C_sample"] for r in self.records_])
        self.C_max_ = self.summary_["C_max"]
        return self

    def predict(self, samples):
        """Per-sample minimal constants."""
        return np.array([r["C_sample"] for r in self._records(samples)])

    def score(self, samples, y=None):
        check_is_fitted(self, "C_max_")
        C = self.predict(samples)
        return float(np.mean(C <= self.margin * self.C_max_))
