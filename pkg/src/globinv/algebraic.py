"""Systems Ax = F(x) with a possibly singular linear part.

Bundles the matrix, the nonlinearity, and the derived residual map
phi(x) = Ax - F(x), plus the packaged worked example: a singular indefinite
2x2 matrix against a coupled cubic nonlinearity, whose unique root decouples
into two scalar cubics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certify import (CertificateReport, check_growth_power,
                      check_jacobian_nonsingular, coercivity_report)
from .core import NonlinearMap
from .errors import InvalidInputError, UniquenessError
from .solver import MultistartResult, SolveConfig, SolveResult, multistart_uniqueness


@dataclass(frozen=True)
class AlgebraicProblem:
    """A: n x n matrix (possibly singular); F: C^1 nonlinearity on R^n."""

    A: np.ndarray
    F: NonlinearMap

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInputError("A must be square")
        if A.shape[0] != self.F.dim:
            raise InvalidInputError("matrix and nonlinearity dimensions disagree")
        object.__setattr__(self, "A", A)

    @property
    def phi(self) -> NonlinearMap:
        """Residual map x -> Ax - F(x) with Jacobian A - F'(x)."""
        A, F = self.A, self.F
        return NonlinearMap(
            dim=F.dim,
            fun=lambda x: A @ x - F(x),
            jac=lambda x: A - F.jacobian(x),
        )


def example_problem() -> AlgebraicProblem:
    """The packaged 2-D benchmark: singular indefinite A, coupled cubic F.

    F(x, y) = (x^3 + y + 1, 6x + y + y^3 + 1) and A = [[-2, 1], [6, -3]]
    (det A = 0).  The root equation Ax = F(x) decouples into the scalar
    cubics x^3 + 2x + 1 = 0 and y^3 + 4y + 1 = 0.
    """
    A = np.array([[-2.0, 1.0], [6.0, -3.0]])

    def fun(v):
        x, y = v
        return np.array([x**3 + y + 1.0, 6.0 * x + y + y**3 + 1.0])

    def jac(v):
        x, y = v
        return np.array([[3.0 * x**2, 1.0], [6.0, 1.0 + 3.0 * y**2]])

    return AlgebraicProblem(A=A, F=NonlinearMap(dim=2, fun=fun, jac=jac))


def certify_example(seed: int = 0) -> list[CertificateReport]:
    """Certificates for the benchmark: Jacobian nonsingularity of A - F' on
    [-10,10]^2, radial coercivity of the residual map, and cubic lower growth
    of F on the tail."""
    prob = example_problem()
    box = np.array([[-10.0, 10.0], [-10.0, 10.0]])
    reports = [
        check_jacobian_nonsingular(prob.F, prob.A, box, grid_per_axis=33,
                                   random_samples=1024, seed=seed),
        coercivity_report(prob.phi, radii=(5.0, 10.0, 20.0, 40.0),
                          samples_per_radius=128, seed=seed),
        check_growth_power(prob.F, mode="superlinear", coeff=0.4, expo=3.0,
                           R=10.0, samples=256, seed=seed),
    ]
    return reports


def solve_example(seed: int = 0, n_starts: int = 64) -> tuple[SolveResult, MultistartResult]:
    """Multistart solve of Ax = F(x) for the benchmark.

    Runs `n_starts` seeded starts in [-5,5]^2 and requires the converged
    roots to cluster; raises UniquenessError otherwise.  Returns the best
    (smallest-residual) result together with the multistart summary.
    """
    prob = example_problem()
    box = np.array([[-5.0, 5.0], [-5.0, 5.0]])
    cfg = SolveConfig(starts=(n_starts, box, seed))
    ms = multistart_uniqueness(prob.phi, np.zeros(2), cfg=cfg)
    if ms.clustered is not True:
        raise UniquenessError(
            f"benchmark roots failed to cluster ({ms.n_converged} converged, "
            f"clustered={ms.clustered})")
    best = min((r for r in ms.results if r.converged), key=lambda r: r.residual_norm)
    return best, ms
