"""Root solving by descent on an auxiliary penalty of the residual.

solve() minimizes value(f(x) - y) for a normalization functional whose value
and gradient vanish only at zero, so stationary points with invertible
Jacobian are exact roots.  A Gauss-Newton step is tried first when the
penalty is quadratic; a backtracking gradient step is the fallback, keeping
every accepted step a sufficient-decrease step.  Multistart clustering is the
numerical stand-in for global uniqueness: agreement of all basins is evidence
of injectivity, never proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import NonlinearMap, NormalizationFunctional, quadratic_functional
from .errors import InvalidInputError

_MIN_STEP = 1e-16


@dataclass(frozen=True)
class SolveConfig:
    tol_residual: float = 1e-10
    tol_gradient: float = 1e-8
    max_iters: int = 500
    ls_shrink: float = 0.5
    ls_decrease: float = 1e-4
    starts: object = None  # explicit points, or (count, box, seed)

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_gradient <= 0:
            raise InvalidInputError("tolerances must be positive")
        if not 0 < self.ls_shrink < 1:
            raise InvalidInputError("line-search shrink factor must be in (0,1)")
        if not 0 < self.ls_decrease < 1:
            raise InvalidInputError("sufficient-decrease constant must be in (0,1)")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be positive")

    def resolve_starts(self, dim: int) -> np.ndarray:
        if self.starts is None:
            raise InvalidInputError("config carries no starts")
        if isinstance(self.starts, tuple) and len(self.starts) == 3 \
                and np.isscalar(self.starts[0]):
            count, box, seed = self.starts
            return generate_starts(int(count), box, int(seed))
        pts = np.asarray(self.starts, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None] if dim == 1 else pts[None, :]
        if pts.shape[1] != dim:
            raise InvalidInputError("start points have wrong dimension")
        return pts


def generate_starts(count: int, box, seed: int) -> np.ndarray:
    """`count` uniform points in an axis-aligned (dim, 2) box."""
    box = np.asarray(box, dtype=float)
    if count < 1:
        raise InvalidInputError("need at least one start")
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise InvalidInputError("box must be (dim, 2) with lower < upper")
    rng = np.random.default_rng(seed)
    u = rng.random((count, box.shape[0]))
    return box[:, 0] + (box[:, 1] - box[:, 0]) * u


@dataclass(frozen=True)
class SolveResult:
    root: np.ndarray
    residual_norm: float
    iterations: int
    trajectory_summary: list
    converged: bool
    gradient_norm: float = float("nan")
    gn_fallbacks: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "root": np.asarray(self.root).tolist(),
            "residual_norm": float(self.residual_norm),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "gradient_norm": float(self.gradient_norm),
            "gn_fallbacks": int(self.gn_fallbacks),
            "message": self.message,
            "trajectory_summary": [[int(i), float(v), float(r)]
                                   for i, v, r in self.trajectory_summary],
        }


def _check_penalty(eta: NormalizationFunctional, dim: int):
    """Spot-check that the penalty and its gradient vanish only at zero."""
    rng = np.random.default_rng(12345)
    if eta.value(np.zeros(dim)) != 0.0:
        raise InvalidInputError("penalty must vanish at zero")
    for scale in (1e-3, 1.0, 1e3):
        v = rng.standard_normal(dim) * scale
        if eta.value(v) <= 0.0 or np.linalg.norm(eta.gradient(v)) == 0.0:
            raise InvalidInputError("penalty or its gradient vanishes away from zero")


def _gn_direction(J: np.ndarray, r: np.ndarray):
    if J.shape[0] == J.shape[1]:
        try:
            d = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
    else:
        d, *_ = np.linalg.lstsq(J, -r, rcond=None)
    if not np.all(np.isfinite(d)):
        return None
    return d


def _backtrack(phi_of, x, phi, d, slope, cfg):
    """Armijo backtracking along d; returns (x_new, phi_new, t) or None."""
    t = 1.0
    while t >= _MIN_STEP:
        x_new = x + t * d
        phi_new = phi_of(x_new)
        if np.isfinite(phi_new) and phi_new <= phi + cfg.ls_decrease * t * slope:
            return x_new, phi_new, t
        t *= cfg.ls_shrink
    return None


def solve(f: NonlinearMap, y, eta: NormalizationFunctional | None = None,
          cfg: SolveConfig | None = None, x0=None) -> SolveResult:
    """Drive f(x) toward y by minimizing the penalty of the residual.

    Terminates on residual norm <= tol_residual, gradient norm <=
    tol_gradient, or the iteration cap; non-convergence is reported, never
    silently returned as a root.
    """
    eta = eta if eta is not None else quadratic_functional()
    cfg = cfg if cfg is not None else SolveConfig()
    y = np.asarray(y, dtype=float).reshape(f.dim_out)
    _check_penalty(eta, f.dim_out)

    if x0 is None:
        if cfg.starts is not None:
            x0 = cfg.resolve_starts(f.dim)[0]
        else:
            x0 = np.zeros(f.dim)
    x = np.asarray(x0, dtype=float).reshape(f.dim).copy()

    def residual(x):
        return f(x) - y

    def phi_of(x):
        return eta.value(residual(x))

    r = residual(x)
    phi = phi_of(x)
    traj = [(0, phi, float(np.linalg.norm(r)))]
    gn_fallbacks = 0
    message = "max_iters reached"
    g_norm = float("nan")
    iterations = 0

    for it in range(1, cfg.max_iters + 1):
        res_norm = float(np.linalg.norm(r))
        if res_norm <= cfg.tol_residual:
            message = "residual tolerance reached"
            break
        J = f.jacobian(x)
        g = J.T @ eta.gradient(r)
        g_norm = float(np.linalg.norm(g))
        if g_norm <= cfg.tol_gradient:
            message = "gradient tolerance reached"
            break

        moved = None
        if eta.is_quadratic:
            d = _gn_direction(J, r)
            if d is None:
                gn_fallbacks += 1
            else:
                slope = float(g @ d)
                if slope < 0:
                    moved = _backtrack(phi_of, x, phi, d, slope, cfg)
                    if moved is None:
                        gn_fallbacks += 1
                else:
                    gn_fallbacks += 1
        if moved is None:
            d = -g
            slope = -g_norm**2
            moved = _backtrack(phi_of, x, phi, d, slope, cfg)
        if moved is None:
            message = "line search stalled"
            break
        x, phi, _ = moved
        r = residual(x)
        iterations = it
        traj.append((it, phi))

    res_norm = float(np.linalg.norm(r))
    converged = res_norm <= cfg.tol_residual
    if converged:
        message = "residual tolerance reached"
    return SolveResult(root=x, residual_norm=res_norm, iterations=iterations,
                       trajectory_summary=traj, converged=converged,
                       gradient_norm=g_norm, gn_fallbacks=gn_fallbacks,
                       message=message)


@dataclass(frozen=True)
class MultistartResult:
    results: list
    clustered: Optional[bool]
    max_pairwise_distance: float
    mean_root: Optional[np.ndarray]
    n_converged: int

    def to_dict(self) -> dict:
        return {
            "clustered": self.clustered,
            "max_pairwise_distance": float(self.max_pairwise_distance),
            "mean_root": None if self.mean_root is None else self.mean_root.tolist(),
            "n_converged": int(self.n_converged),
            "n_starts": len(self.results),
            "results": [r.to_dict() for r in self.results],
        }


def multistart_uniqueness(f: NonlinearMap, y, eta=None, cfg: SolveConfig | None = None
                          ) -> MultistartResult:
    """Run solve() from every configured start and test root clustering.

    Roots cluster when every converged root lies within 10 * tol_residual of
    their mean.  Non-converged starts are excluded from the statistics but
    counted; with fewer than two converged roots the clustering verdict is
    undetermined (None).
    """
    cfg = cfg if cfg is not None else SolveConfig()
    starts = cfg.resolve_starts(f.dim)
    if starts.shape[0] < 2:
        raise InvalidInputError("multistart needs at least two starts")
    results = [solve(f, y, eta, cfg, x0=s) for s in starts]
    roots = np.array([r.root for r in results if r.converged])
    n_conv = roots.shape[0]
    if n_conv < 2:
        return MultistartResult(results, None, float("nan"), None, n_conv)
    mean = roots.mean(axis=0)
    spread = np.linalg.norm(roots - mean, axis=1)
    diffs = roots[:, None, :] - roots[None, :, :]
    max_pairwise = float(np.max(np.linalg.norm(diffs, axis=-1)))
    clustered = bool(np.max(spread) <= 10.0 * cfg.tol_residual)
    return MultistartResult(results, clustered, max_pairwise, mean, n_conv)


def invert_on_targets(f: NonlinearMap, targets: Sequence, eta=None,
                      cfg: SolveConfig | None = None, x0=None) -> list:
    """Solve f(x) = y for each target, warm-starting from the previous root.

    Returns a list of (target, SolveResult); failures are recorded and the
    batch continues from the last available iterate.
    """
    cfg = cfg if cfg is not None else SolveConfig()
    current = np.zeros(f.dim) if x0 is None else np.asarray(x0, dtype=float)
    out = []
    for y in targets:
        res = solve(f, y, eta, cfg, x0=current)
        out.append((np.asarray(y, dtype=float), res))
        current = res.root
    return out
