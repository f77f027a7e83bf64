"""Sampling-based certificates for coercivity and nonsingularity conditions.

Each check samples a declared domain, aggregates a worst-case margin (a
running minimum, so more samples can only lower it), and returns a
CertificateReport.  These are desk-scale surrogates: a passing report is
evidence over the sampled set, not a proof over the whole space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import sampling
from .core import NonlinearMap
from .errors import InvalidInputError

# Below this, |det| is numerically indistinguishable from singular.
DET_TOL = 1e-12


@dataclass(frozen=True)
class CertificateReport:
    """Structured outcome of one hypothesis check.

    `margin` is the worst-case slack over all samples; `passed` is True
    exactly when the margin clears the check's threshold (0 unless the check
    records a different one in `parameters["threshold"]`).  Witnesses record
    the worst sample points with their measured values.
    """

    condition_id: str
    passed: bool
    margin: float
    witnesses: list
    samples_used: int
    parameters: dict
    seed: Optional[int] = None

    def __post_init__(self):
        threshold = float(self.parameters.get("threshold", 0.0))
        if self.passed != (self.margin > threshold):
            raise InvalidInputError("report passed flag inconsistent with margin")

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "witnesses": [
                {"point": np.asarray(p).ravel().tolist(), "value": float(v)}
                for p, v in self.witnesses
            ],
            "samples_used": int(self.samples_used),
            "parameters": self.parameters,
            "seed": self.seed,
        }


def _report(condition_id, margin, witnesses, samples_used, parameters, seed):
    threshold = float(parameters.get("threshold", 0.0))
    return CertificateReport(
        condition_id=condition_id,
        passed=bool(margin > threshold),
        margin=float(margin),
        witnesses=witnesses,
        samples_used=samples_used,
        parameters=parameters,
        seed=seed,
    )


def singular_value_bounds(A) -> tuple[float, float]:
    """Extreme singular values of A: square roots of the extreme eigenvalues
    of A^T A.  They bracket ||Ax||/||x||."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("A must be a square matrix")
    if not np.any(A):
        raise InvalidInputError("zero matrix has no usable singular-value bounds")
    eigvals = np.linalg.eigvalsh(A.T @ A)
    eigvals = np.clip(eigvals, 0.0, None)
    return float(np.sqrt(eigvals[0])), float(np.sqrt(eigvals[-1]))


def _growth_margins(F: NonlinearMap, points: np.ndarray, envelope) -> np.ndarray:
    norms_x = np.linalg.norm(points, axis=1)
    norms_F = np.array([np.linalg.norm(F(x)) for x in points])
    return envelope(norms_x, norms_F)


def _min_witnesses(points, margins, keep=3):
    order = np.argsort(margins)[:keep]
    return [(points[i].tolist(), float(margins[i])) for i in order]


def _growth_check(condition_id, F, coeff, expo, R, samples, seed, direction):
    if samples < 1:
        raise InvalidInputError("need at least one sample")
    if R <= 0 or coeff <= 0:
        raise InvalidInputError("radius threshold and coefficient must be positive")
    points = sampling.annulus_points(F.dim, R, 10.0 * R, samples, seed)
    if direction == "upper":
        env = lambda nx, nf: coeff * nx**expo - nf
    else:
        env = lambda nx, nf: nf - coeff * nx**expo
    margins = _growth_margins(F, points, env)
    params = {
        "coeff": coeff,
        "expo": expo,
        "radius_inner": R,
        "radius_outer": 10.0 * R,
        "note": "sampling surrogate over the annulus, not a proof",
    }
    return _report(condition_id, margins.min(), _min_witnesses(points, margins),
                   samples, params, seed)


def check_growth_small(F: NonlinearMap, a: float, R: float, samples: int = 256,
                       seed: int = 0) -> CertificateReport:
    """Sampled check of ||F(x)|| <= a ||x|| on the tail annulus [R, 10R].

    The caller compares `a` against the smallest singular value of the linear
    part separately.
    """
    return _growth_check("growth_i_small", F, a, 1.0, R, samples, seed, "upper")


def check_growth_large(F: NonlinearMap, b: float, R: float, samples: int = 256,
                       seed: int = 0) -> CertificateReport:
    """Sampled check of ||F(x)|| >= b ||x|| on the tail annulus [R, 10R]."""
    return _growth_check("growth_i_large", F, b, 1.0, R, samples, seed, "lower")


def check_growth_power(F: NonlinearMap, mode: str, coeff: float, expo: float,
                       R: float, samples: int = 256, seed: int = 0) -> CertificateReport:
    """Sampled power-growth check on [R, 10R].

    mode "sublinear": ||F(x)|| <= coeff ||x||^expo with 0 < expo < 1.
    mode "superlinear": ||F(x)|| >= coeff ||x||^expo with expo > 1.
    """
    if mode == "sublinear":
        if not 0 < expo < 1:
            raise InvalidInputError("sublinear mode needs 0 < expo < 1")
        return _growth_check("growth_iia", F, coeff, expo, R, samples, seed, "upper")
    if mode == "superlinear":
        if not expo > 1:
            raise InvalidInputError("superlinear mode needs expo > 1")
        return _growth_check("growth_iib", F, coeff, expo, R, samples, seed, "lower")
    raise InvalidInputError(f"unknown growth mode {mode!r}")


def check_jacobian_nonsingular(F: NonlinearMap, A, box, grid_per_axis: int = 33,
                               random_samples: int = 1024, seed: int = 0,
                               det_tol: float = DET_TOL) -> CertificateReport:
    """Sampled lower bound on |det(A - F'(x))| over an axis-aligned box.

    Margin is the smallest |det| seen; the check passes when it stays above
    `det_tol`.  A sampling surrogate: it cannot certify nonsingularity between
    samples.
    """
    A = np.asarray(A, dtype=float)
    box = np.asarray(box, dtype=float)
    pts = [sampling.box_grid(box, grid_per_axis)]
    if random_samples:
        pts.append(sampling.box_points(box, random_samples, seed))
    points = np.vstack(pts)
    dets = np.array([np.linalg.det(A - F.jacobian(x)) for x in points])
    margins = np.abs(dets)
    params = {
        "threshold": det_tol,
        "grid_per_axis": grid_per_axis,
        "random_samples": random_samples,
        "box": box.tolist(),
        "note": "sampling surrogate over the box, not a proof",
    }
    return _report("jacobian_nonsingular", margins.min(),
                   _min_witnesses(points, margins), len(points), params, seed)


def coercivity_witness(phi: NonlinearMap, radii, samples_per_radius: int = 128,
                       seed: int = 0):
    """Empirical radial growth table for ||phi|| on spheres of given radii.

    Returns (table, indicator) where table rows are (r, min over sphere
    samples of ||phi(x)||).  The indicator flags growth consistent with
    coercivity: minima strictly increasing with ratio min/r non-decreasing
    along the whole tail (at-least-linear escape to infinity); bounded maps
    fail it.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise InvalidInputError("radii must be positive and strictly increasing")
    table = []
    for i, r in enumerate(radii):
        pts = sampling.sphere_points(phi.dim, r, samples_per_radius, seed + i)
        vals = [np.linalg.norm(phi(x)) for x in pts]
        table.append((float(r), float(np.min(vals))))
    values = np.array([v for _, v in table])
    ratios = values / radii
    increasing = bool(np.all(np.diff(values) > 0))
    superlinear = bool(np.all(np.diff(ratios) >= -1e-9 * np.abs(ratios[:-1])))
    return table, (increasing and superlinear)


def coercivity_report(phi: NonlinearMap, radii, samples_per_radius: int = 128,
                      seed: int = 0) -> CertificateReport:
    """CertificateReport wrapper around `coercivity_witness`.

    Margin is the smallest increment of min||phi||/r between consecutive
    radii, positive exactly when the growth table indicates coercive escape.
    """
    table, _ = coercivity_witness(phi, radii, samples_per_radius, seed)
    radii_arr = np.array([r for r, _ in table])
    values = np.array([v for _, v in table])
    ratios = values / radii_arr
    margin = float(np.min(np.diff(ratios)))
    if np.any(np.diff(values) <= 0):
        margin = min(margin, float(np.min(np.diff(values))))
    # Flat ratio profiles (linear growth) count as coercive; tolerance below.
    threshold = -1e-9 * float(np.max(np.abs(ratios))) if np.any(ratios) else 0.0
    witnesses = [([r], v) for r, v in table]
    params = {"threshold": threshold, "radii": radii_arr.tolist(),
              "samples_per_radius": samples_per_radius,
              "note": "growth-table indicator, evidence only"}
    return _report("coercivity_witness", margin, witnesses, len(table) * samples_per_radius,
                   params, seed)
