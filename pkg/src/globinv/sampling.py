"""Reproducible point generation for sampling-based certificates.

Each generator mixes a deterministic low-discrepancy (Halton) stream with a
seeded uniform stream.  Points are produced row by row so that the first k
points of an n-point request coincide with a k-point request; running minima
over samples are therefore monotone in the sample count.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm, qmc

from .errors import InvalidInputError


def _unit_rows(raw: np.ndarray) -> np.ndarray:
    """Map rows of uniforms in (0,1) to unit directions via inverse normals."""
    g = norm.ppf(np.clip(raw, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    return g / norms[:, None]


def _mixed_uniforms(n: int, dim: int, seed: int) -> np.ndarray:
    """n x dim uniforms: Halton prefix for the first half, seeded RNG after."""
    if n < 1:
        raise InvalidInputError("need at least one sample")
    n_det = n // 2
    parts = []
    if n_det:
        parts.append(qmc.Halton(d=dim, scramble=False).random(n_det))
    n_rand = n - n_det
    if n_rand:
        rng = np.random.default_rng(seed)
        parts.append(rng.random((n_rand, dim)))
    return np.vstack(parts)


def annulus_points(dim: int, r_inner: float, r_outer: float, n: int, seed: int) -> np.ndarray:
    """Points with norms spread over [r_inner, r_outer]."""
    if not 0 < r_inner < r_outer:
        raise InvalidInputError("need 0 < r_inner < r_outer")
    u = _mixed_uniforms(n, dim + 1, seed)
    radii = r_inner + (r_outer - r_inner) * u[:, -1]
    return _unit_rows(u[:, :dim]) * radii[:, None]


def sphere_points(dim: int, radius: float, n: int, seed: int) -> np.ndarray:
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    u = _mixed_uniforms(n, dim, seed)
    return _unit_rows(u) * radius


def box_points(box: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Uniform-style points in an axis-aligned box given as (dim, 2) bounds."""
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise InvalidInputError("box must be (dim, 2) with lower < upper")
    u = _mixed_uniforms(n, box.shape[0], seed)
    return box[:, 0] + (box[:, 1] - box[:, 0]) * u


def box_grid(box: np.ndarray, points_per_axis: int) -> np.ndarray:
    """Full tensor grid over the box, flattened to (points_per_axis^dim, dim)."""
    box = np.asarray(box, dtype=float)
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])
