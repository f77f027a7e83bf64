"""Domain types and shared numerical plumbing.

Maps with Jacobians, grid functions on [0,1] pinned at t=0, normalization
functionals (value/gradient pairs vanishing only at the origin), and
finite-difference cross-checks used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridTooCoarseError, InvalidInputError, UnsupportedExponentError

# Central-difference step balancing truncation against rounding.
FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("non-finite input vector")
    return arr


@dataclass(frozen=True)
class NonlinearMap:
    """A map R^dim -> R^dim_out with an optional analytic Jacobian.

    `fun` must be deterministic.  When `jac` is omitted, central finite
    differences are used.  `dim_out` defaults to `dim` (square map).
    """

    dim: int
    fun: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dim_out: Optional[int] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dim must be a positive integer")
        if self.dim_out is None:
            object.__setattr__(self, "dim_out", self.dim)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        out = np.asarray(self.fun(x), dtype=float).reshape(self.dim_out)
        return out

    def jacobian(self, x) -> np.ndarray:
        """Analytic Jacobian if supplied, central differences otherwise."""
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if self.jac is not None:
            return np.asarray(self.jac(x), dtype=float).reshape(self.dim_out, self.dim)
        return jacobian_fd(self, x)


def jacobian_fd(f: NonlinearMap, x, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of `f` at `x`.

    Exact (to rounding) for affine maps; used as the fallback Jacobian and as
    the cross-check for analytic ones.
    """
    x = np.asarray(x, dtype=float).reshape(f.dim)
    if h is None:
        h = FD_STEP * max(1.0, float(np.linalg.norm(x)))
    if h <= 0:
        raise InvalidInputError("finite-difference step must be positive")
    cols = []
    for j in range(f.dim):
        e = np.zeros(f.dim)
        e[j] = h
        cols.append((f(x + e) - f(x - e)) / (2.0 * h))
    J = np.column_stack(cols)
    if not np.all(np.isfinite(J)):
        raise FloatingPointError("non-finite values in finite-difference Jacobian")
    return J


@dataclass(frozen=True)
class GridFunction:
    """Function on the uniform grid t_i = i/n_cells of [0,1] with x(0)=0.

    The derivative is represented by forward differences on cells, which makes
    values <-> derivative samples a bijection under the pinned left endpoint.
    Values may be scalar, shape (n_cells+1,), or vector, shape (n_cells+1, n).
    """

    n_cells: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_cells < 1:
            raise InvalidInputError("n_cells must be a positive integer")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape[0] != self.n_cells + 1:
            raise InvalidInputError(
                f"values must have {self.n_cells + 1} rows, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("non-finite grid values")
        if not np.all(vals[0] == 0.0):
            raise InvalidInputError("grid function must vanish at t=0")
        object.__setattr__(self, "values", vals)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    def derivative(self) -> np.ndarray:
        """Forward-difference derivative samples, one per cell."""
        return np.diff(self.values, axis=0) / self.h

    @classmethod
    def from_derivative(cls, d, n_cells: int | None = None) -> "GridFunction":
        """Reconstruct nodal values by cumulative summation of cell slopes."""
        d = np.asarray(d, dtype=float)
        n = d.shape[0] if n_cells is None else n_cells
        if d.shape[0] != n:
            raise InvalidInputError("derivative samples must match n_cells")
        zero = np.zeros((1,) + d.shape[1:])
        vals = np.concatenate([zero, np.cumsum(d * (1.0 / n), axis=0)])
        return cls(n_cells=n, values=vals)

    @classmethod
    def from_callable(cls, fn, n_cells: int) -> "GridFunction":
        t = np.linspace(0.0, 1.0, n_cells + 1)
        vals = np.asarray([fn(ti) for ti in t], dtype=float)
        return cls(n_cells=n_cells, values=vals)


def trapezoid_weights(n_nodes: int, h: float) -> np.ndarray:
    """Composite trapezoidal weights for n_nodes equispaced nodes."""
    w = np.full(n_nodes, h)
    w[0] = w[-1] = h / 2.0
    return w


def half_square_norm(v) -> tuple[float, np.ndarray]:
    """The quadratic penalty (1/2)||v||^2 with its gradient (the identity)."""
    v = _as_vector(v)
    return 0.5 * float(v @ v), v.copy()


def lp_energy(u, p: float) -> tuple[float, np.ndarray]:
    """(1/p) * integral of |u|^p over [0,1] from equispaced samples.

    Uses composite trapezoidal quadrature; the gradient with respect to the
    samples is |u_i|^{p-2} u_i scaled by the quadrature weights.
    """
    if p < 2:
        raise UnsupportedExponentError(f"exponent p={p} unsupported, need p >= 2")
    u = _as_vector(u)
    if u.size < 2:
        raise GridTooCoarseError("need at least two samples on [0,1]")
    w = trapezoid_weights(u.size, 1.0 / (u.size - 1))
    au = np.abs(u)
    value = float(np.sum(w * au**p)) / p
    grad = w * au ** (p - 2.0) * u
    return value, grad


def sobolev_energy(x: GridFunction, p: float) -> tuple[float, np.ndarray]:
    """(1/p) * integral of |x'|^p for a grid function, with nodal gradient.

    The derivative is piecewise constant on cells, so the integral is an exact
    cell sum.  The gradient is taken with respect to the free nodal values
    x_1..x_n (x_0 is pinned at zero) by discrete integration by parts; its
    action realizes the weighted derivative pairing sum |x'|^{p-2} x' v'.
    """
    if p < 2:
        raise UnsupportedExponentError(f"exponent p={p} unsupported, need p >= 2")
    if x.n_cells < 2:
        raise GridTooCoarseError("sobolev_energy needs n_cells >= 2")
    d = x.derivative()
    if d.ndim == 1:
        speed = np.abs(d)
    else:
        speed = np.linalg.norm(d, axis=-1)
    h = x.h
    value = float(np.sum(speed**p)) * h / p
    # flux per cell: |x'|^{p-2} x'
    if d.ndim == 1:
        flux = speed ** (p - 2.0) * d
    else:
        flux = speed[:, None] ** (p - 2.0) * d
    grad = np.empty_like(d)
    grad[:-1] = flux[:-1] - flux[1:]
    grad[-1] = flux[-1]
    return value, grad


@dataclass(frozen=True)
class NormalizationFunctional:
    """Nonnegative C^1 penalty vanishing (with its gradient) only at 0.

    Minimizing value(f(x) - y) drives f(x) to y exactly because of that
    vanishing property.  `p` records the power-family exponent; p == 2 marks
    the (possibly weighted) quadratic case where a Gauss-Newton step is exact
    for affine maps.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    p: float = 2.0

    @property
    def is_quadratic(self) -> bool:
        return self.p == 2.0


def quadratic_functional() -> NormalizationFunctional:
    return NormalizationFunctional(
        value=lambda v: half_square_norm(v)[0],
        gradient=lambda v: half_square_norm(v)[1],
        p=2.0,
    )


def lp_sample_functional(p: float, weights=None) -> NormalizationFunctional:
    """(1/p) sum w_i |v_i|^p on raw sample vectors (unit weights by default)."""
    if p < 2:
        raise UnsupportedExponentError(f"exponent p={p} unsupported, need p >= 2")
    w = None if weights is None else np.asarray(weights, dtype=float)

    def value(v):
        v = _as_vector(v)
        ww = 1.0 if w is None else w
        return float(np.sum(ww * np.abs(v) ** p)) / p

    def gradient(v):
        v = _as_vector(v)
        ww = 1.0 if w is None else w
        return ww * np.abs(v) ** (p - 2.0) * v

    return NormalizationFunctional(value=value, gradient=gradient, p=p)
