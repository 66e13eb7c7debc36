"""Numerical verification of relative wedge locality.

The mixed commutator of the reflected and unreflected fields acts on each
n-particle level by multiplication with a pair of line integrals over the
real rapidity axis.  For test functions supported in opposite wedges the
two integrands are boundary values of one function analytic in the
physical strip, so the integrals cancel; the checks below evaluate both
integrals, their sum, and the strip-shift mechanism behind the
cancellation, then repeat the statement at operator level on truncated
vectors.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .errors import TailError, WedgeQFTError
from .fields import field_norm_scale, field_phi, field_phi_prime, in_wedge, mass_shell
from .sfunction import evaluate

WINDOW_DEFAULT = 8.0
ORDER_DEFAULT = 2048
RESIDUAL_FLOOR = 1e-14
TAIL_TOL = 1e-10


@lru_cache(maxsize=32)
def _gl_line(window, order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x * window, w * window


def _line_integral(S, psi1_vals, psi2_vals, nodes, weights, thetas, flip,
                   shift=0.0):
    """\\int psi1 psi2 prod_j S2(+-(t - theta_j)) dt along Im(t) = shift."""
    F = psi1_vals * psi2_vals
    t = nodes + 1j * shift
    for tj in thetas:
        F = F * (evaluate(S, tj - t) if flip else evaluate(S, t - tj))
    value = complex(np.dot(F, weights))
    tail = (abs(F[0]) + abs(F[-1])) * abs(weights[0])
    return value, tail


def eval_b(S, psi1, psi2, thetas, window=WINDOW_DEFAULT, order=ORDER_DEFAULT):
    """B_n = + \\int psi1(t) psi2(t) prod_j S2(t - theta_j) dt.

    ``psi1`` and ``psi2`` are callables on (complex) rapidity, typically
    mass-shell restrictions.  Raises :class:`TailError` when the sampled
    endpoint values indicate a non-negligible tail beyond the window.
    """
    t, w = _gl_line(window, order)
    value, tail = _line_integral(S, psi1(t), psi2(t), t, w, thetas, flip=False)
    _check_tail(value, tail)
    return value


def eval_c(S, psi1, psi2, thetas, window=WINDOW_DEFAULT, order=ORDER_DEFAULT):
    """C_n = - \\int psi1(t) psi2(t) prod_j S2(theta_j - t) dt."""
    t, w = _gl_line(window, order)
    value, tail = _line_integral(S, psi1(t), psi2(t), t, w, thetas, flip=True)
    _check_tail(value, tail)
    return -value


def _check_tail(value, tail):
    if tail > TAIL_TOL * max(abs(value), RESIDUAL_FLOOR):
        raise TailError(
            f"integrand tail estimate {tail:.2e} not negligible against "
            f"value {abs(value):.2e}; enlarge the window")


def _restriction(S, f, sign):
    return lambda z: mass_shell(f, sign, z, mass=S.mass)


@dataclass(frozen=True)
class ContourReport:
    """Residuals of the commutator-function cancellation for one model."""

    n: int
    samples: tuple          # per-sample dicts for CSV emission
    max_relative: float
    shift_relative: float
    tol: float

    @property
    def passed(self):
        return max(self.max_relative, self.shift_relative) <= self.tol

    def as_dict(self):
        return {"n": self.n, "max_relative": self.max_relative,
                "shift_relative": self.shift_relative, "tol": self.tol,
                "passed": self.passed}


def verify_contour_identity(S, f, g, n, spectators, tol,
                            window=WINDOW_DEFAULT, order=ORDER_DEFAULT,
                            check_support=True):
    """Check B_n(f-, g+) + C_n(f+, g-) = 0 over spectator samples.

    ``f`` must be supported in the right wedge and ``g`` in the left one
    (box-corner test).  Also verifies the shift mechanism: moving the B
    integration line to Im(t) = pi reproduces the same value.
    """
    if check_support:
        if f.support_box is None or g.support_box is None:
            raise WedgeQFTError("contour identity requires compactly "
                                "supported test functions")
        if not in_wedge(f.support_box, "R"):
            raise WedgeQFTError(f"f box {f.support_box} not inside W_R")
        if not in_wedge(g.support_box, "L"):
            raise WedgeQFTError(f"g box {g.support_box} not inside W_L")
    fm = _restriction(S, f, -1)
    gp = _restriction(S, g, +1)
    fp = _restriction(S, f, +1)
    gm = _restriction(S, g, -1)

    t, w = _gl_line(window, order)
    fm_v, gp_v = fm(t), gp(t)
    fp_v, gm_v = fp(t), gm(t)
    rows = []
    worst = 0.0
    for theta in spectators:
        theta = tuple(float(x) for x in theta)
        if len(theta) != n:
            raise ValueError(f"spectator tuple {theta} does not have length {n}")
        B, tail_b = _line_integral(S, fm_v, gp_v, t, w, theta, flip=False)
        C, tail_c = _line_integral(S, fp_v, gm_v, t, w, theta, flip=True)
        C = -C
        _check_tail(B, tail_b)
        _check_tail(C, tail_c)
        rel = abs(B + C) / max(abs(B), abs(C), RESIDUAL_FLOOR)
        worst = max(worst, rel)
        rows.append({"n": n, "thetas": theta, "abs_b": abs(B), "abs_c": abs(C),
                     "abs_sum": abs(B + C), "relative": rel})

    # shift mechanism at the first sample: B computed on Im(t) = pi
    theta0 = tuple(float(x) for x in spectators[0]) if spectators else ()
    B0, _ = _line_integral(S, fm_v, gp_v, t, w, theta0, flip=False)
    zs = t + 1j * math.pi
    Bs, _ = _line_integral(S, fm(zs), gp(zs), t, w, theta0, flip=False,
                           shift=math.pi)
    shift_rel = abs(Bs - B0) / max(abs(B0), RESIDUAL_FLOOR)

    return ContourReport(n=n, samples=tuple(rows), max_relative=float(worst),
                         shift_relative=float(shift_rel), tol=float(tol))


def refinement_study(S, f, g, n, spectators, orders,
                     window=WINDOW_DEFAULT):
    """Max relative residual at each quadrature order (for ratio checks)."""
    out = []
    for order in orders:
        rep = verify_contour_identity(S, f, g, n, spectators, tol=math.inf,
                                      window=window, order=order)
        out.append(rep.max_relative)
    return out


@dataclass(frozen=True)
class CommutatorReport:
    residual: float
    tol: float

    @property
    def passed(self):
        return self.residual <= self.tol

    def as_dict(self):
        return {"residual": self.residual, "tol": self.tol,
                "passed": self.passed}


def verify_operator_commutator(S, f, g, Phi, tol, check_support=True,
                               normalize=True):
    """|| [phi'(f), phi(g)] Phi || / ||Phi||, optionally per unit field scale.

    With ``normalize`` the residual is divided by the product of the
    natural operator scales ||f+|| + ||f-|| and ||g+|| + ||g-||, so a fixed
    tolerance is meaningful regardless of test-function amplitudes.
    """
    if check_support:
        if not in_wedge(f.support_box, "R"):
            raise WedgeQFTError(f"f box {f.support_box} not inside W_R")
        if not in_wedge(g.support_box, "L"):
            raise WedgeQFTError(f"g box {g.support_box} not inside W_L")
    lhs = field_phi_prime(S, f, field_phi(S, g, Phi))
    rhs = field_phi(S, g, field_phi_prime(S, f, Phi))
    resid = lhs.sub(rhs).norm() / max(Phi.norm(), 1e-300)
    if normalize:
        scale = (field_norm_scale(S, f, Phi.grid)
                 * field_norm_scale(S, g, Phi.grid))
        resid /= max(scale, 1e-300)
    return CommutatorReport(residual=float(resid), tol=float(tol))
