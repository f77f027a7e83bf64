"""Global-inversion toolkit.

Certifies sufficient conditions for nonlinear maps to be globally invertible
(sampled growth, Jacobian nonsingularity, radial coercivity), solves f(x)=y
by descent on a residual penalty with multistart uniqueness evidence, and
applies the machinery to algebraic systems Ax=F(x) and to initial-value
Volterra integro-differential problems under exponentially weighted norms.
"""

from .algebraic import AlgebraicProblem, certify_example, example_problem, solve_example
from .bielecki import (BieleckiParams, bielecki_lp_norm, bielecki_sobolev_norm,
                       check_equivalence, check_integral_bound,
                       check_poincare_bielecki, coercivity_lower_bound,
                       select_k, sobolev_norm)
from .certify import (CertificateReport, check_growth_large, check_growth_power,
                      check_growth_small, check_jacobian_nonsingular,
                      coercivity_report, coercivity_witness, singular_value_bounds)
from .core import (GridFunction, NonlinearMap, NormalizationFunctional,
                   half_square_norm, jacobian_fd, lp_energy,
                   lp_sample_functional, quadratic_functional, sobolev_energy)
from .errors import (DivergenceError, GridTooCoarseError, InvalidInputError,
                     UniquenessError, UnsupportedExponentError)
from .solver import (MultistartResult, SolveConfig, SolveResult, generate_starts,
                     invert_on_targets, multistart_uniqueness, solve)
from .volterra import (DerivativeCheck, VolterraKernel, check_envelopes,
                       kernel_constants, linear_kernel, powerlog_kernel,
                       residual, solution_operator_derivative, solve_forward,
                       solve_variational, tabulated_linear_kernel,
                       variational_value, zero_kernel)

__version__ = "0.1.0"
