"""Exponentially weighted (Bielecki-type) norms on discretized grid functions.

The weight e^{-kt} leaves the Sobolev-type norm equivalent to the unweighted
one while shrinking memory-term constants by powers of 1/k, which is what
makes the Volterra energy coercive once k is chosen large enough relative to
the kernel's growth constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridFunction, trapezoid_weights
from .errors import InvalidInputError, UnsupportedExponentError


@dataclass(frozen=True)
class BieleckiParams:
    """Integrability exponent p >= 2 and weight rate k >= 0; q is conjugate."""

    p: float
    k: float
    q: float = None

    def __post_init__(self):
        if self.p < 2:
            raise UnsupportedExponentError(f"exponent p={self.p} unsupported, need p >= 2")
        if self.k < 0:
            raise InvalidInputError("weight rate k must be nonnegative")
        object.__setattr__(self, "q", self.p / (self.p - 1.0))


def _speed(d: np.ndarray) -> np.ndarray:
    return np.abs(d) if d.ndim == 1 else np.linalg.norm(d, axis=-1)


def _cell_weights(n_cells: int, k: float) -> np.ndarray:
    """Trapezoidal average of e^{-kt} on each cell."""
    t = np.linspace(0.0, 1.0, n_cells + 1)
    w = np.exp(-k * t)
    return 0.5 * (w[:-1] + w[1:])


def sobolev_norm(x: GridFunction, p: float) -> float:
    """(integral of |x'|^p)^{1/p} from the cell derivative samples."""
    if p < 2:
        raise UnsupportedExponentError(f"exponent p={p} unsupported, need p >= 2")
    d = _speed(x.derivative())
    return float((np.sum(d**p) * x.h) ** (1.0 / p))


def bielecki_sobolev_norm(x: GridFunction, params: BieleckiParams) -> float:
    """(integral of e^{-kt} |x'|^p)^{1/p}; equals sobolev_norm at k=0."""
    d = _speed(x.derivative())
    w = _cell_weights(x.n_cells, params.k)
    return float((np.sum(w * d**params.p) * x.h) ** (1.0 / params.p))


def bielecki_lp_norm(values, params: BieleckiParams) -> float:
    """(integral of e^{-kt} |x|^p)^{1/p} by nodal trapezoidal quadrature.

    Accepts raw nodal samples (no pinning at t=0) or a GridFunction.
    """
    if isinstance(values, GridFunction):
        values = values.values
    v = np.asarray(values, dtype=float)
    mag = np.abs(v) if v.ndim == 1 else np.linalg.norm(v, axis=-1)
    n = mag.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two samples")
    t = np.linspace(0.0, 1.0, n)
    w = trapezoid_weights(n, 1.0 / (n - 1))
    return float(np.sum(w * np.exp(-params.k * t) * mag**params.p) ** (1.0 / params.p))


def running_integral(values, h: float) -> np.ndarray:
    """Cumulative trapezoidal integral of nodal samples, zero at t=0."""
    v = np.asarray(values, dtype=float)
    steps = 0.5 * h * (v[:-1] + v[1:])
    zero = np.zeros((1,) + v.shape[1:])
    return np.concatenate([zero, np.cumsum(steps, axis=0)])


def _quad_tol(x: GridFunction, *scales) -> float:
    return 50.0 * x.h**2 * (1.0 + sum(abs(s) for s in scales))


def check_equivalence(x: GridFunction, params: BieleckiParams):
    """Two-sided equivalence of the weighted and plain derivative norms:
    e^{-k/p} ||x|| <= ||x||_k <= ||x||.

    Holds exactly at the discrete level (the cell weights lie in
    [e^{-k}, 1]), so only rounding slack is allowed.
    """
    plain = sobolev_norm(x, params.p)
    weighted = bielecki_sobolev_norm(x, params)
    lower = weighted - np.exp(-params.k / params.p) * plain
    upper = plain - weighted
    tol = 1e-9 * (1.0 + plain + weighted)
    return bool(lower >= -tol and upper >= -tol), (float(lower), float(upper))


def check_poincare_bielecki(x: GridFunction, params: BieleckiParams):
    """Weighted Poincare-type bound ||x||_k <= ||x'||_k / k^{1/p}."""
    if params.k <= 0:
        raise InvalidInputError("Poincare-type bound needs k > 0")
    lhs = bielecki_lp_norm(x.values, params)
    rhs = bielecki_sobolev_norm(x, params) / params.k ** (1.0 / params.p)
    slack = rhs - lhs
    return bool(slack >= -_quad_tol(x, lhs, rhs)), float(slack)


def check_integral_bound(x: GridFunction, params: BieleckiParams):
    """Running-integral bound ||int_0^. |x|||_k <= ||x'||_k / k^{2/p}."""
    if params.k <= 0:
        raise InvalidInputError("integral bound needs k > 0")
    mag = np.abs(x.values) if x.values.ndim == 1 else np.linalg.norm(x.values, axis=-1)
    lhs = bielecki_lp_norm(running_integral(mag, x.h), params)
    rhs = bielecki_sobolev_norm(x, params) / params.k ** (2.0 / params.p)
    slack = rhs - lhs
    return bool(slack >= -_quad_tol(x, lhs, rhs)), float(slack)


def select_k(a_bar: float, p: float, margin: float = 0.1) -> float:
    """Weight rate guaranteeing a positive coercivity factor 1 - a_bar/k^{2/p}.

    Returns max(1, a_bar^{p/2}) * (1 + margin); any k above max(1, a_bar^{p/2})
    works, the margin keeps the factor bounded away from zero.
    """
    if a_bar < 0:
        raise InvalidInputError("growth constant a_bar must be nonnegative")
    if p < 2:
        raise UnsupportedExponentError(f"exponent p={p} unsupported, need p >= 2")
    if margin <= 0:
        raise InvalidInputError("margin must be positive")
    return max(1.0, a_bar ** (p / 2.0)) * (1.0 + margin)


def coercivity_lower_bound(x: GridFunction, y_values, kernel, params: BieleckiParams):
    """Evaluate both sides of the weighted coercivity estimate.

    lhs = (p * phi(x))^{1/p} with phi the variational Volterra energy;
    rhs = (1 - a_bar/k^{2/p}) ||x||_{W,k} - ||y||_k - ||int b||_k.
    The estimate bounds the energy from below by the weighted derivative
    norm, up to data terms, whenever k is admissible.
    """
    # deferred import: volterra builds on this module
    from .volterra import _memory_weights, variational_value

    value = variational_value(x, y_values, kernel, params)
    lhs = (params.p * value) ** (1.0 / params.p)

    factor = 1.0 - kernel.a_bar / params.k ** (2.0 / params.p)
    t = x.nodes
    W = _memory_weights(x.n_cells)
    B = kernel.envelope_b(t[:, None], np.minimum(t[None, :], t[:, None]))
    b_running = np.einsum("ij,ij->i", W, B)
    rhs = (factor * bielecki_sobolev_norm(x, params)
           - bielecki_lp_norm(np.asarray(y_values, dtype=float), params)
           - bielecki_lp_norm(b_running, params))
    return float(lhs), float(rhs)


def random_grid_function(n_cells: int, rng: np.random.Generator, scale: float = 1.0
                         ) -> GridFunction:
    """Random test function vanishing at t=0: smooth Fourier/polynomial modes
    or rough white-noise slopes, chosen at random."""
    t = np.linspace(0.0, 1.0, n_cells + 1)
    kind = rng.integers(3)
    if kind == 0:
        vals = np.zeros_like(t)
        for m in range(1, 6):
            vals += rng.normal() / m**2 * np.sin(np.pi * m * t)
        vals += rng.normal() * t
    elif kind == 1:
        coeffs = rng.normal(size=4)
        vals = t * np.polyval(coeffs, t)
    else:
        return GridFunction.from_derivative(scale * rng.normal(size=n_cells))
    return GridFunction(n_cells=n_cells, values=scale * vals)
