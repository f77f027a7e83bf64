"""Initial-value Volterra integro-differential problems on [0,1].

Solves x'(t) + int_0^t K(t, tau, x(tau)) dtau = y(t), x(0) = 0, two ways:
a predictor-corrector trapezoidal march (the constructive reference) and
minimization of the exponentially weighted residual energy via the descent
solver.  Also ships kernel growth-envelope verification, kernel constant
quadrature, and a finite-difference probe of the data-to-solution derivative.

Kernel callables must broadcast over numpy arrays.  Scalar-state kernels take
and return plain arrays; vector-state kernels receive states with a trailing
axis of length state_dim and return matching shapes (phi_x gains a second
trailing axis).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bielecki import BieleckiParams, select_k
from .certify import CertificateReport, _min_witnesses, _report
from .core import FD_STEP, GridFunction, lp_sample_functional, NonlinearMap
from .errors import DivergenceError, GridTooCoarseError, InvalidInputError
from .solver import SolveConfig, SolveResult, solve


@dataclass(frozen=True)
class VolterraKernel:
    """Memory kernel with declared growth envelopes.

    envelope_a, envelope_b bound the value: |K(t,tau,x)| <= a|x| + b;
    envelope_c and alpha_growth bound the state derivative:
    |K_x(t,tau,x)| <= c(t,tau) * alpha_growth(|x|).  `a_bar` bounds
    (int_0^t a^p)^{1/p} and `c_q_bound` bounds int_0^t c^q, both declared for
    exponent `p_declared`.
    """

    phi: Callable
    phi_x: Callable
    envelope_a: Callable
    envelope_b: Callable
    envelope_c: Callable
    alpha_growth: Callable
    a_bar: float
    c_q_bound: float
    p_declared: float = 2.0
    state_dim: int = 1
    name: str = ""


# ---------------------------------------------------------------------------
# kernel constructors


def powerlog_kernel(alpha: float = 1.0, p: float = 2.0) -> VolterraKernel:
    """Scalar kernel alpha (t-tau)^{5/2} ln(1 + (t-tau)^2 x^2).

    Envelopes: value bounded by a|x| + b with a = b = alpha u^{5/2}
    (from ln(1+s^2 z^2) <= |s| + |z| and u <= 1); derivative bounded by
    c * g(|x|) with c = (alpha/2) u^{5/2} and g(s) = 4s/(1+s^2), which is
    sharp at u = 1.  Constants in closed form:
    a_bar = alpha (2/(5p+2))^{1/p}, int c^q <= 2 (alpha/2)^q / (5q+2).
    """
    if alpha <= 0:
        raise InvalidInputError("alpha must be positive")
    q = p / (p - 1.0)

    def u_of(t, tau):
        return np.maximum(np.asarray(t) - np.asarray(tau), 0.0)

    def phi(t, tau, x):
        u = u_of(t, tau)
        return alpha * u**2.5 * np.log1p(u**2 * x**2)

    def phi_x(t, tau, x):
        u = u_of(t, tau)
        return alpha * u**2.5 * 2.0 * u**2 * x / (1.0 + u**2 * x**2)

    env = lambda t, tau: alpha * u_of(t, tau) ** 2.5
    return VolterraKernel(
        phi=phi, phi_x=phi_x,
        envelope_a=env, envelope_b=env,
        envelope_c=lambda t, tau: 0.5 * alpha * u_of(t, tau) ** 2.5,
        alpha_growth=lambda s: 4.0 * s / (1.0 + s**2),
        a_bar=alpha * (2.0 / (5.0 * p + 2.0)) ** (1.0 / p),
        c_q_bound=2.0 * (alpha / 2.0) ** q / (5.0 * q + 2.0),
        p_declared=p, name="powerlog",
    )


def zero_kernel() -> VolterraKernel:
    def zeros_like_all(t, tau, x):
        shape = np.broadcast(np.asarray(t), np.asarray(tau), np.asarray(x)).shape
        return np.zeros(shape)

    zero2 = lambda t, tau: np.zeros(np.broadcast(np.asarray(t), np.asarray(tau)).shape)
    return VolterraKernel(
        phi=zeros_like_all, phi_x=zeros_like_all,
        envelope_a=zero2, envelope_b=zero2, envelope_c=zero2,
        alpha_growth=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        a_bar=0.0, c_q_bound=0.0, name="zero",
    )


def linear_kernel(coeff: float = 1.0, p: float = 2.0) -> VolterraKernel:
    """Scalar kernel K = coeff * x (pure convolution memory)."""
    c = abs(coeff)
    const2 = lambda t, tau: np.full(np.broadcast(np.asarray(t), np.asarray(tau)).shape, c)
    zero2 = lambda t, tau: np.zeros(np.broadcast(np.asarray(t), np.asarray(tau)).shape)
    q = p / (p - 1.0)
    return VolterraKernel(
        phi=lambda t, tau, x: coeff * x + 0.0 * (np.asarray(t) + np.asarray(tau)),
        phi_x=lambda t, tau, x: coeff + 0.0 * (np.asarray(t) + np.asarray(tau) + x),
        envelope_a=const2, envelope_b=zero2, envelope_c=const2,
        alpha_growth=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        a_bar=c, c_q_bound=c**q,
        p_declared=p, name="linear",
    )


def tabulated_linear_kernel(t_pts, tau_pts, table, p: float = 2.0) -> VolterraKernel:
    """Kernel K(t,tau,x) = m(t,tau) x with m interpolated from a table.

    `table[i, j]` holds m(t_pts[i], tau_pts[j]); bilinear interpolation in
    between.  Growth constants are computed from the tabulated |m| by
    trapezoidal quadrature.
    """
    from scipy.interpolate import RegularGridInterpolator

    t_pts = np.asarray(t_pts, dtype=float)
    tau_pts = np.asarray(tau_pts, dtype=float)
    table = np.asarray(table, dtype=float)
    if table.shape != (t_pts.size, tau_pts.size):
        raise InvalidInputError("table shape must match (t_pts, tau_pts)")
    interp = RegularGridInterpolator((t_pts, tau_pts), table, bounds_error=False,
                                     fill_value=None)

    def m(t, tau):
        t, tau = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(tau, dtype=float))
        pts = np.stack([t.ravel(), tau.ravel()], axis=-1)
        return interp(pts).reshape(t.shape)

    def abs_m(t, tau):
        return np.abs(m(t, tau))

    zero2 = lambda t, tau: np.zeros(np.broadcast(np.asarray(t), np.asarray(tau)).shape)
    q = p / (p - 1.0)
    # growth constants from the table grid
    sup_ap = 0.0
    sup_cq = 0.0
    for i, ti in enumerate(t_pts):
        mask = tau_pts <= ti + 1e-12
        if mask.sum() < 2:
            continue
        taus = tau_pts[mask]
        vals = np.abs(table[i, mask])
        sup_ap = max(sup_ap, float(np.trapezoid(vals**p, taus)))
        sup_cq = max(sup_cq, float(np.trapezoid(vals**q, taus)))
    return VolterraKernel(
        phi=lambda t, tau, x: m(t, tau) * x,
        phi_x=lambda t, tau, x: m(t, tau) + 0.0 * x,
        envelope_a=abs_m, envelope_b=zero2, envelope_c=abs_m,
        alpha_growth=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        a_bar=sup_ap ** (1.0 / p), c_q_bound=sup_cq,
        p_declared=p, name="tabulated",
    )


# ---------------------------------------------------------------------------
# shared grid machinery


def sample_y(y, n_cells: int) -> np.ndarray:
    """Nodal samples of the forcing term from a callable, scalar, or array."""
    t = np.linspace(0.0, 1.0, n_cells + 1)
    if callable(y):
        vals = np.asarray([y(ti) for ti in t], dtype=float)
    elif np.isscalar(y):
        vals = np.full(n_cells + 1, float(y))
    else:
        vals = np.asarray(y, dtype=float)
        if vals.shape[0] != n_cells + 1:
            raise InvalidInputError("forcing samples must match the grid nodes")
    if not np.all(np.isfinite(vals)):
        raise InvalidInputError("non-finite forcing samples")
    return vals


def _memory_weights(n_cells: int) -> np.ndarray:
    """W[i, j]: trapezoid weight of node j in the integral over [0, t_i]."""
    h = 1.0 / n_cells
    W = np.tril(np.full((n_cells + 1, n_cells + 1), h))
    idx = np.arange(n_cells + 1)
    W[idx, idx] *= 0.5
    W[:, 0] *= 0.5
    W[0, :] = 0.0
    return W

def _phi_matrix(kernel: VolterraKernel, t: np.ndarray, values: np.ndarray,
                deriv: bool = False) -> np.ndarray:
    """K(t_i, tau_j, x_j) (or K_x) for all node pairs, lower triangle used.

    tau is clamped to t in the (weight-zero) upper triangle so kernels need
    only be defined on tau <= t.
    """
    fn = kernel.phi_x if deriv else kernel.phi
    tau = np.minimum(t[None, :], t[:, None])
    if values.ndim == 1:
        return fn(t[:, None], tau, values[None, :])
    return fn(t[:, None], tau, values[None, :, :])


def memory_integrals(kernel: VolterraKernel, x_values: np.ndarray) -> np.ndarray:
    """Q_i = trapezoidal integral of K(t_i, ., x(.)) over [0, t_i], all i."""
    n = x_values.shape[0] - 1
    t = np.linspace(0.0, 1.0, n + 1)
    W = _memory_weights(n)
    vals = _phi_matrix(kernel, t, x_values)
    if x_values.ndim == 1:
        return np.einsum("ij,ij->i", W, vals)
    return np.einsum("ij,ij...->i...", W, vals)


def node_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order nodal derivative: one-sided 3-point at the ends, central
    in the interior."""
    if values.shape[0] < 3:
        raise GridTooCoarseError("nodal derivative needs at least 2 cells")
    d = np.empty_like(values)
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    d[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    d[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    return d


def residual(x: GridFunction, y, kernel: VolterraKernel) -> np.ndarray:
    """Nodal residual x'(t_i) + Q_i - y(t_i) of the integro-differential
    equation; O(n^-2) for solutions sampled on the grid."""
    y_vals = sample_y(y, x.n_cells)
    dx = node_derivative(x.values, x.h)
    return dx + memory_integrals(kernel, x.values) - y_vals


# ---------------------------------------------------------------------------
# forward (marching) solver


def solve_forward(kernel: VolterraKernel, y, n_cells: int) -> GridFunction:
    """Trapezoidal predictor-corrector march of the initial-value problem.

    Each step takes an explicit Euler predictor and one trapezoidal
    correction, with the memory integral rebuilt by product trapezoidal
    quadrature; second-order accurate for C^2 data.
    """
    if n_cells < 8:
        raise GridTooCoarseError("solve_forward needs n_cells >= 8")
    y_vals = sample_y(y, n_cells)
    h = 1.0 / n_cells
    t = np.linspace(0.0, 1.0, n_cells + 1)
    vals = np.zeros_like(y_vals)
    W = _memory_weights(n_cells)

    def memory_at(i, values):
        if i == 0:
            return np.zeros(values.shape[1:])
        w = W[i, : i + 1]
        ker = kernel.phi(t[i], t[: i + 1], values[: i + 1])
        return np.tensordot(w, ker, axes=(0, 0))

    for i in range(n_cells):
        g_i = y_vals[i] - memory_at(i, vals)
        vals[i + 1] = vals[i] + h * g_i  # predictor
        g_next = y_vals[i + 1] - memory_at(i + 1, vals)
        vals[i + 1] = vals[i] + 0.5 * h * (g_i + g_next)  # one correction
        if not np.all(np.isfinite(vals[i + 1])):
            raise DivergenceError(f"marching diverged at step {i + 1}", step=i + 1)
    return GridFunction(n_cells=n_cells, values=vals)


# ---------------------------------------------------------------------------
# variational solver


def _cell_scales(n_cells: int, params: BieleckiParams) -> np.ndarray:
    """Per-cell quadrature scale (h * avg weight)^{1/p} folded into residuals."""
    t = np.linspace(0.0, 1.0, n_cells + 1)
    w = np.exp(-params.k * t)
    wbar = 0.5 * (w[:-1] + w[1:])
    return (wbar / n_cells) ** (1.0 / params.p)


def cell_residuals(values: np.ndarray, y_vals: np.ndarray, kernel: VolterraKernel
                   ) -> np.ndarray:
    """Midpoint residual per cell: forward slope plus averaged memory minus
    averaged forcing."""
    n = values.shape[0] - 1
    d = np.diff(values, axis=0) * n
    Q = memory_integrals(kernel, values)
    return d + 0.5 * (Q[:-1] + Q[1:]) - 0.5 * (y_vals[:-1] + y_vals[1:])


def variational_value(x: GridFunction, y, kernel: VolterraKernel,
                      params: BieleckiParams) -> float:
    """Weighted residual energy (1/p) ||x' - y + int K||_k^p on the grid."""
    y_vals = sample_y(y, x.n_cells)
    r = cell_residuals(x.values, y_vals, kernel)
    mag = np.abs(r) if r.ndim == 1 else np.linalg.norm(r, axis=-1)
    scales = _cell_scales(x.n_cells, params)
    return float(np.sum((scales * mag) ** params.p)) / params.p


def variational_map(kernel: VolterraKernel, y, n_cells: int,
                    params: BieleckiParams) -> NonlinearMap:
    """Square map from free nodal values to weight-scaled cell residuals.

    Minimizing the p-power of its output is the discretized weighted energy;
    the analytic Jacobian combines the difference stencil with the product
    quadrature of the kernel's state derivative.
    """
    if n_cells < 2:
        raise GridTooCoarseError("variational grid needs n_cells >= 2")
    y_vals = sample_y(y, n_cells)
    dim_state = 1 if y_vals.ndim == 1 else y_vals.shape[1]
    n_free = n_cells * dim_state
    h = 1.0 / n_cells
    t = np.linspace(0.0, 1.0, n_cells + 1)
    W = _memory_weights(n_cells)
    scales = _cell_scales(n_cells, params)

    def assemble(z):
        vals = np.concatenate([np.zeros((1,) + y_vals.shape[1:]),
                               z.reshape((n_cells,) + y_vals.shape[1:])])
        return vals

    def fun(z):
        r = cell_residuals(assemble(z), y_vals, kernel)
        scaled = scales[:, None] * r if r.ndim > 1 else scales * r
        return scaled.ravel()

    def jac(z):
        vals = assemble(z)
        PX = _phi_matrix(kernel, t, vals, deriv=True)
        if y_vals.ndim == 1:
            WP = W * PX
            mem = 0.5 * (WP[:-1, 1:] + WP[1:, 1:])
            D = (np.eye(n_cells) - np.eye(n_cells, k=-1)) / h
            return scales[:, None] * (D + mem)
        n_s = dim_state
        WP = W[:, :, None, None] * PX
        mem = 0.5 * (WP[:-1, 1:] + WP[1:, 1:])  # (cells, free nodes, n, n)
        D = (np.eye(n_cells) - np.eye(n_cells, k=-1)) / h
        blocks = mem + D[:, :, None, None] * np.eye(n_s)
        J = blocks.transpose(0, 2, 1, 3).reshape(n_free, n_free)
        return scales.repeat(n_s)[:, None] * J

    return NonlinearMap(dim=n_free, fun=fun, jac=jac)


def solve_variational(kernel: VolterraKernel, y, params: Optional[BieleckiParams] = None,
                      n_cells: int = 256, cfg: Optional[SolveConfig] = None,
                      x0: Optional[GridFunction] = None
                      ) -> tuple[GridFunction, SolveResult]:
    """Minimize the weighted residual energy over the free nodal values.

    The weight rate defaults to the admissible choice select_k(a_bar, p).
    Returns the minimizer with the descent diagnostics; non-convergence is
    visible in the result, never silent.
    """
    if params is None:
        p = kernel.p_declared
        params = BieleckiParams(p=p, k=select_k(kernel.a_bar, p))
    cfg = cfg if cfg is not None else SolveConfig()
    fmap = variational_map(kernel, y, n_cells, params)
    eta = lp_sample_functional(params.p)
    if x0 is not None:
        if x0.n_cells != n_cells:
            raise InvalidInputError("initial grid function does not match n_cells")
        z0 = x0.values[1:].ravel()
    else:
        z0 = np.zeros(fmap.dim)
    result = solve(fmap, np.zeros(fmap.dim), eta, cfg, x0=z0)
    y_vals = sample_y(y, n_cells)
    shape = (n_cells,) + y_vals.shape[1:]
    vals = np.concatenate([np.zeros((1,) + y_vals.shape[1:]), result.root.reshape(shape)])
    return GridFunction(n_cells=n_cells, values=vals), result


# ---------------------------------------------------------------------------
# kernel diagnostics


def kernel_constants(kernel: VolterraKernel, p: float, n_quad: int = 2048
                     ) -> tuple[float, float, float]:
    """Quadrature values of the kernel's growth constants.

    Returns (double integral of a^p over the triangle,
             sup_t (int_0^t a^p)^{1/p},
             sup_t int_0^t c^q) with q conjugate to p.
    """
    if p < 2:
        raise InvalidInputError("kernel constants need p >= 2")
    q = p / (p - 1.0)
    t = np.linspace(0.0, 1.0, n_quad + 1)
    h = 1.0 / n_quad
    W = _memory_weights(n_quad)
    a_vals = kernel.envelope_a(t[:, None], t[None, :])
    c_vals = kernel.envelope_c(t[:, None], t[None, :])
    inner_a = np.einsum("ij,ij->i", W, np.tril(a_vals) ** p)
    inner_c = np.einsum("ij,ij->i", W, np.tril(c_vals) ** q)
    outer = np.full(n_quad + 1, h)
    outer[0] = outer[-1] = h / 2.0
    lp_a = float(np.sum(outer * inner_a))
    a_bar_check = float(np.max(inner_a) ** (1.0 / p))
    c_q_sup = float(np.max(inner_c))
    return lp_a, a_bar_check, c_q_sup


def check_envelopes(kernel: VolterraKernel, n_t: int = 33, n_x: int = 41,
                    x_max: float = 10.0, random_samples: int = 2000,
                    seed: int = 0, fd_rel_tol: float = 1e-5
                    ) -> list[CertificateReport]:
    """Sampled verification of the kernel's declared growth envelopes.

    Checks, over the time triangle crossed with [-x_max, x_max]:
    value envelope |K| <= a|x| + b, derivative envelope
    |K_x| <= c * alpha_growth(|x|), and agreement of K_x with central finite
    differences of K.  Margins allow exact-equality patterns (threshold is a
    small negative rounding allowance).
    """
    if kernel.state_dim != 1:
        raise InvalidInputError("envelope sampling is implemented for scalar kernels")
    rng = np.random.default_rng(seed)
    t_grid = np.linspace(0.0, 1.0, n_t)
    frac = np.linspace(0.0, 1.0, n_t)
    x_grid = np.linspace(-x_max, x_max, n_x)
    T, Frac, X = np.meshgrid(t_grid, frac, x_grid, indexing="ij")
    Tau = T * Frac
    T, Tau, X = (arr.ravel() for arr in (T, Tau, X))
    if random_samples:
        rt = rng.random(random_samples)
        T = np.concatenate([T, rt])
        Tau = np.concatenate([Tau, rt * rng.random(random_samples)])
        X = np.concatenate([X, x_max * (2.0 * rng.random(random_samples) - 1.0)])

    a = kernel.envelope_a(T, Tau)
    b = kernel.envelope_b(T, Tau)
    c = kernel.envelope_c(T, Tau)
    phi = kernel.phi(T, Tau, X)
    phix = kernel.phi_x(T, Tau, X)

    points = np.column_stack([T, Tau, X])
    scale_tol = 1e-12

    m_value = a * np.abs(X) + b - np.abs(phi)
    thr_value = -scale_tol * (1.0 + float(np.max(np.abs(phi), initial=0.0)))
    m_deriv = c * kernel.alpha_growth(np.abs(X)) - np.abs(phix)
    thr_deriv = -scale_tol * (1.0 + float(np.max(np.abs(phix), initial=0.0)))

    delta = FD_STEP * np.maximum(1.0, np.abs(X))
    fd = (kernel.phi(T, Tau, X + delta) - kernel.phi(T, Tau, X - delta)) / (2.0 * delta)
    rel_err = np.abs(fd - phix) / (1.0 + np.abs(phix))
    m_fd = fd_rel_tol - rel_err

    def rep(cond, margins, threshold, extra):
        params = {"threshold": threshold, "x_max": x_max, "n_grid": n_t * n_t * n_x,
                  "random_samples": random_samples, **extra}
        return _report(cond, margins.min(), _min_witnesses(points, margins),
                       len(margins), params, seed)

    return [
        rep("kernel_value_envelope", m_value, thr_value, {}),
        rep("kernel_derivative_envelope", m_deriv, thr_deriv, {}),
        rep("kernel_derivative_consistency", m_fd, 0.0, {"fd_rel_tol": fd_rel_tol}),
    ]


# ---------------------------------------------------------------------------
# solution-operator differentiability probe


@dataclass(frozen=True)
class DerivativeCheck:
    """Directional finite-difference probe of the forcing-to-solution map."""

    eps: list
    estimates: list          # one derivative-sample array per eps
    ratios: list             # sup-norm ratios of consecutive estimates
    consistent: bool
    derivative: GridFunction  # extrapolated limit estimate

    def to_dict(self) -> dict:
        return {
            "eps": [float(e) for e in self.eps],
            "ratios": [float(r) for r in self.ratios],
            "consistent": bool(self.consistent),
        }


def solution_operator_derivative(kernel: VolterraKernel, y, dy, eps_list=(1e-2, 1e-3, 1e-4),
                                 n_cells: int = 256, ratio_tol: float = 0.1
                                 ) -> DerivativeCheck:
    """Directional derivative estimates of y -> x_y by one-sided differences.

    Computes (x_{y+eps dy} - x_y)/eps for each eps, reports sup-norm ratios of
    consecutive estimates (near 1 when the limit exists), and extrapolates the
    two finest estimates to eps -> 0.
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps_list) < 2:
        raise InvalidInputError("need at least two eps values")
    y_vals = sample_y(y, n_cells)
    dy_vals = sample_y(dy, n_cells)
    base = solve_forward(kernel, y_vals, n_cells)
    estimates = []
    for eps in eps_list:
        pert = solve_forward(kernel, y_vals + eps * dy_vals, n_cells)
        estimates.append((pert.values - base.values) / eps)
    sups = [float(np.max(np.abs(e))) for e in estimates]
    ratios = []
    for s_prev, s_next in zip(sups[:-1], sups[1:]):
        ratios.append(s_prev / s_next if s_next > 0 else float("inf"))
    consistent = all(abs(r - 1.0) <= ratio_tol for r in ratios)
    e_a, e_b = eps_list[-2], eps_list[-1]
    d_a, d_b = estimates[-2], estimates[-1]
    limit = (e_a * d_b - e_b * d_a) / (e_a - e_b)
    limit[0] = 0.0
    return DerivativeCheck(eps=eps_list, estimates=estimates, ratios=ratios,
                           consistent=consistent,
                           derivative=GridFunction(n_cells=n_cells, values=limit))
