"""Grids and grid functions: discretized states plus the metadata needed
for quadrature and finite-difference derivatives."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

BOUNDARIES = ("none", "periodic", "neumann", "dirichlet")


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid: points per axis, spacing per axis, boundary tag."""

    shape: tuple
    spacing: tuple
    boundary: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        if len(self.shape) != len(self.spacing):
            raise DimensionError("shape and spacing must have the same length")
        if any(n < 1 for n in self.shape):
            raise DimensionError("grid axes must have at least one point")
        if any(h <= 0 for h in self.spacing):
            raise DimensionError("grid spacing must be positive")
        if self.boundary not in BOUNDARIES:
            raise DimensionError(f"unknown boundary tag {self.boundary!r}")

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def npoints(self):
        return int(np.prod(self.shape))

    @property
    def cell_measure(self):
        """Quadrature weight of a single grid cell, prod of spacings."""
        return float(np.prod(self.spacing))

    @property
    def measure(self):
        """Total measure covered by the quadrature weights."""
        return self.cell_measure * self.npoints


def unit_grid(n):
    """1D grid with unit weights; the default for bare vectors."""
    return Grid((int(n),), (1.0,), "none")


@dataclass(frozen=True)
class GridFunction:
    """Values of a (possibly multi-component) state on a grid.

    ``values`` has shape ``grid.shape`` for a scalar state or
    ``(ncomp,) + grid.shape`` for a multi-component one.
    """

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values)
        object.__setattr__(self, "values", vals)
        gs = self.grid.shape
        if vals.shape == gs:
            return
        if vals.ndim == self.grid.ndim + 1 and vals.shape[1:] == gs:
            return
        if vals.ndim == 1 and vals.size % self.grid.npoints == 0:
            # flat (possibly multi-component) vector, any grid dimension
            return
        raise DimensionError(
            f"values of shape {vals.shape} do not fit grid {gs}"
        )

    @property
    def ncomp(self):
        return self.values.size // self.grid.npoints

    def ravel(self):
        return self.values.reshape(-1)

    def components(self):
        """Iterate component arrays, each of shape grid.shape."""
        flat = self.values.reshape(self.ncomp, *self.grid.shape)
        for c in range(self.ncomp):
            yield flat[c]

    def with_values(self, values):
        return GridFunction(values, self.grid)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            other = other.values
        return GridFunction(self.values + other, self.grid)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            other = other.values
        return GridFunction(self.values - other, self.grid)

    def __mul__(self, scalar):
        return GridFunction(self.values * scalar, self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values, self.grid)


def as_gridfunction(u, grid=None):
    """Wrap a bare array into a GridFunction (unit weights by default)."""
    if isinstance(u, GridFunction):
        return u
    u = np.asarray(u)
    if grid is None:
        grid = unit_grid(u.size)
        u = u.reshape(-1)
    return GridFunction(u, grid)


@lru_cache(maxsize=64)
def derivative_matrix_1d(n, h, boundary):
    """Sparse centered first-derivative matrix, one-sided at closed ends."""
    if n < 3:
        raise DimensionError("need at least 3 points for derivatives")
    inv2h = 1.0 / (2.0 * h)
    rows, cols, vals = [], [], []
    for i in range(n):
        if boundary == "periodic":
            rows += [i, i]
            cols += [(i + 1) % n, (i - 1) % n]
            vals += [inv2h, -inv2h]
        elif i == 0:
            rows += [0, 0, 0]
            cols += [0, 1, 2]
            vals += [-3.0 * inv2h, 4.0 * inv2h, -inv2h]
        elif i == n - 1:
            rows += [i, i, i]
            cols += [n - 1, n - 2, n - 3]
            vals += [3.0 * inv2h, -4.0 * inv2h, inv2h]
        else:
            rows += [i, i]
            cols += [i + 1, i - 1]
            vals += [inv2h, -inv2h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _axis_op(grid, axis, order):
    """D_axis^order lifted to the full tensor grid (single component)."""
    mats = []
    for ax, n in enumerate(grid.shape):
        if ax == axis and order > 0:
            d = derivative_matrix_1d(n, grid.spacing[ax], grid.boundary)
            m = d
            for _ in range(order - 1):
                m = m @ d
            mats.append(m)
        else:
            mats.append(sp.identity(n, format="csr"))
    full = mats[0]
    for m in mats[1:]:
        full = sp.kron(full, m, format="csr")
    return full


def multi_indices(ndim, k):
    """All derivative multi-indices with total order <= k, identity first."""
    out = []
    for total in range(k + 1):
        if ndim == 1:
            out.append((total,))
        else:
            for a in range(total + 1):
                out.append((total - a, a))
    return out


@lru_cache(maxsize=32)
def _derivative_ops_cached(grid, k):
    ops = []
    for alpha in multi_indices(grid.ndim, k):
        op = sp.identity(grid.npoints, format="csr")
        for ax, order in enumerate(alpha):
            if order > 0:
                op = _axis_op(grid, ax, order) @ op
        ops.append(op)
    return tuple(ops)


def derivative_ops(grid, k):
    """Sparse D^alpha for every multi-index |alpha| <= k, acting on flat
    single-component vectors; the first entry is the identity."""
    return _derivative_ops_cached(grid, k)
