"""Spacetime test functions and the two wedge-local field operators.

Two test-function families are supported: Gaussians with a general
quadratic exponent (closed-form Fourier transform, closed under Poincare
maps, used for covariance and scattering checks) and smooth compactly
supported bumps (Fourier transform by Gauss-Legendre quadrature over the
support box; genuine support restriction, used wherever wedge membership
matters).

Fourier convention: ft(p) = (1/2pi) \\int f(x) e^{i p.x} d^2x with the
Minkowski pairing p.x = p0 x0 - p1 x1.  The mass-shell restrictions are
f^{+-}(z) = ft(+-p(z)) with p(z) = mass * (cosh z, sinh z); for compactly
supported f these are entire in z.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

from .errors import QuadratureOverflowError
from .fock import FockVector, WaveFunction1, annihilate, create, reflect_j, symmetrize
from .sfunction import node_matrix

EXP_BUDGET = 700.0  # |Im(p.x)| cap before exp() leaves double range


def _boost_matrix(lam):
    ch, sh = math.cosh(lam), math.sinh(lam)
    return np.array([[ch, sh], [sh, ch]])


@dataclass(frozen=True)
class Gaussian2D:
    """amp * exp(-(x-c)^T Q (x-c) / 2 + i k.(x-c)) with Euclidean pairing k.x.

    ``quad`` is a symmetric positive-definite 2x2 array; the isotropic case
    quad = I/sigma^2 is what the config format exposes.  The family is
    closed under Poincare transforms, time reflection and conjugation,
    which keeps covariance checks free of quadrature error.
    """

    center: tuple
    quad: tuple          # ((q00, q01), (q01, q11)) row-major
    modulation: tuple    # Euclidean momentum k
    amplitude: complex = 1.0

    @classmethod
    def isotropic(cls, center, sigma, q=(0.0, 0.0), amplitude=1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        g = 1.0 / sigma ** 2
        return cls(center=(float(center[0]), float(center[1])),
                   quad=((g, 0.0), (0.0, g)),
                   modulation=(float(q[0]), float(q[1])),
                   amplitude=complex(amplitude))

    def _qmat(self):
        return np.array(self.quad, dtype=float)

    def __call__(self, x0, x1):
        d0 = np.asarray(x0) - self.center[0]
        d1 = np.asarray(x1) - self.center[1]
        Q = self._qmat()
        quad = Q[0, 0] * d0 ** 2 + 2 * Q[0, 1] * d0 * d1 + Q[1, 1] * d1 ** 2
        phase = self.modulation[0] * d0 + self.modulation[1] * d1
        return self.amplitude * np.exp(-quad / 2 + 1j * phase)

    def fourier(self, p0, p1):
        """Closed-form ft at (arrays of) complex Minkowski momentum."""
        u0 = np.asarray(p0, dtype=complex)
        u1 = -np.asarray(p1, dtype=complex)  # Euclidean pairing
        Q = self._qmat()
        det = Q[0, 0] * Q[1, 1] - Q[0, 1] ** 2
        inv = np.array([[Q[1, 1], -Q[0, 1]], [-Q[0, 1], Q[0, 0]]]) / det
        v0 = u0 + self.modulation[0]
        v1 = u1 + self.modulation[1]
        quad = inv[0, 0] * v0 ** 2 + 2 * inv[0, 1] * v0 * v1 + inv[1, 1] * v1 ** 2
        phase = u0 * self.center[0] + u1 * self.center[1]
        return self.amplitude / math.sqrt(det) * np.exp(1j * phase - quad / 2)

    def transformed(self, x, lam=0.0):
        """Parameters of f_(x, lam)(y) = f(Lambda(-lam)(y - x))."""
        Linv = _boost_matrix(-lam)
        c = _boost_matrix(lam) @ np.array(self.center) + np.array(x)
        Q = Linv.T @ self._qmat() @ Linv
        k = Linv.T @ np.array(self.modulation)
        return replace(self, center=(c[0], c[1]),
                       quad=((Q[0, 0], Q[0, 1]), (Q[0, 1], Q[1, 1])),
                       modulation=(k[0], k[1]))

    def star(self):
        """f*(x) = conj(f(-x))."""
        return replace(self, center=(-self.center[0], -self.center[1]),
                       amplitude=np.conj(self.amplitude))

    def conj(self):
        return replace(self,
                       modulation=(-self.modulation[0], -self.modulation[1]),
                       amplitude=np.conj(self.amplitude))

    def time_reflected(self):
        """f_T(x0, x1) = conj(f(-x0, x1))."""
        T = np.diag([-1.0, 1.0])
        Q = T @ self._qmat() @ T
        return replace(self, center=(-self.center[0], self.center[1]),
                       quad=((Q[0, 0], Q[0, 1]), (Q[0, 1], Q[1, 1])),
                       modulation=(self.modulation[0], -self.modulation[1]),
                       amplitude=np.conj(self.amplitude))

    support_box = None


@lru_cache(maxsize=16)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def _auto_order(base, phase):
    """Smallest ladder order resolving a one-axis oscillation budget."""
    need = max(base, int(1.3 * phase) + 48)
    order = max(base, 64)
    while order < need:
        order *= 2
    return min(order, 1 << 14)


@dataclass(frozen=True)
class Bump2D:
    """amp * g((x0-c0)/h0) * g((x1-c1)/h1) with g(u) = exp(-1/(1-u^2)).

    Supported exactly on the box [a0, b0] x [a1, b1].  The Fourier
    transform factorizes into two one-dimensional quadratures whose order
    grows automatically with the requested momentum so large rapidities do
    not alias (``order`` is the floor).
    """

    box: tuple               # (a0, b0, a1, b1)
    amplitude: complex = 1.0
    order: int = 64

    def __post_init__(self):
        a0, b0, a1, b1 = self.box
        if not (b0 > a0 and b1 > a1):
            raise ValueError(f"degenerate support box {self.box}")

    @property
    def center(self):
        a0, b0, a1, b1 = self.box
        return (0.5 * (a0 + b0), 0.5 * (a1 + b1))

    @property
    def half_width(self):
        a0, b0, a1, b1 = self.box
        return (0.5 * (b0 - a0), 0.5 * (b1 - a1))

    def __call__(self, x0, x1):
        u0 = (np.asarray(x0) - self.center[0]) / self.half_width[0]
        u1 = (np.asarray(x1) - self.center[1]) / self.half_width[1]
        return self.amplitude * _bump_profile(u0) * _bump_profile(u1)

    def _axis_integral(self, axis, p, sign):
        """\\int f_axis(x) e^{i sign p x} dx over the support interval."""
        c = self.center[axis]
        h = self.half_width[axis]
        p = np.asarray(p, dtype=complex)
        im_max = float(np.max(np.abs(p.imag))) * (abs(c) + h)
        if im_max > EXP_BUDGET:
            raise QuadratureOverflowError(
                f"imaginary phase {im_max:.1f} exceeds budget {EXP_BUDGET}")
        order = _auto_order(self.order, float(np.max(np.abs(p))) * h)
        u, w = _leggauss(order)
        x = c + h * u
        f = _bump_profile(u)
        return (np.exp(1j * sign * np.multiply.outer(p, x))
                * (f * w * h)).sum(axis=-1)

    def fourier(self, p0, p1):
        i0 = self._axis_integral(0, p0, +1)
        i1 = self._axis_integral(1, p1, -1)
        return self.amplitude * i0 * i1 / (2 * math.pi)

    def transformed(self, x, lam=0.0):
        if lam != 0.0:
            raise ValueError("boosts do not preserve product bumps; "
                             "use gaussians for boost covariance checks")
        a0, b0, a1, b1 = self.box
        return replace(self, box=(a0 + x[0], b0 + x[0], a1 + x[1], b1 + x[1]))

    def star(self):
        a0, b0, a1, b1 = self.box
        return replace(self, box=(-b0, -a0, -b1, -a1),
                       amplitude=np.conj(self.amplitude))

    def conj(self):
        return replace(self, amplitude=np.conj(self.amplitude))

    def time_reflected(self):
        a0, b0, a1, b1 = self.box
        return replace(self, box=(-b0, -a0, a1, b1),
                       amplitude=np.conj(self.amplitude))

    @property
    def support_box(self):
        return self.box


def _bump_profile(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    den = np.where(inside, 1.0 - u ** 2, 1.0)
    return np.where(inside, np.exp(-1.0 / den), 0.0)


def in_wedge(box, which, shift=(0.0, 0.0)):
    """Corner test for box membership in a translated wedge.

    Right wedge: x1 - shift1 > |x0 - shift0|; left wedge mirrored.
    """
    a0, b0, a1, b1 = box
    corners = [(a0, a1), (a0, b1), (b0, a1), (b0, b1)]
    for (x0, x1) in corners:
        d0, d1 = x0 - shift[0], x1 - shift[1]
        if which in ("R", "right"):
            if not d1 > abs(d0):
                return False
        elif which in ("L", "left"):
            if not -d1 > abs(d0):
                return False
        else:
            raise ValueError(f"unknown wedge {which!r}")
    return True


def mass_shell(f, sign, zeta, mass=1.0):
    """f^{+-}(z) = (1/2pi) \\int f(+-x) e^{i p(z).x} d^2x.

    Vectorized over ``zeta``; for bumps the quadrature order adapts to the
    largest requested momentum.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    z = np.asarray(zeta, dtype=complex)
    p0 = mass * np.cosh(z)
    p1 = mass * np.sinh(z)
    return f.fourier(sign * p0, sign * p1)


def sample_mass_shell(f, sign, grid, mass=1.0):
    """Mass-shell restriction sampled at the grid nodes."""
    vals = mass_shell(f, sign, grid.nodes.astype(complex), mass=mass)
    return WaveFunction1(grid, vals)


def field_phi(S, f, Phi):
    """Left-wedge field: creator of f^+ plus annihilator of f^-.

    The result carries one more level than ``Phi``; nothing is truncated,
    so iterated commutators close exactly at grid level.
    """
    fp = sample_mass_shell(f, +1, Phi.grid, mass=S.mass)
    fm = sample_mass_shell(f, -1, Phi.grid, mass=S.mass)
    return create(S, fp, Phi).add(annihilate(S, fm, Phi))


def field_phi_prime(S, f, Phi):
    """Right-wedge partner field, conjugated by the TCP reflection."""
    return reflect_j(field_phi(S, f.star(), reflect_j(Phi)))


def field_norm_scale(S, f, grid):
    """||f^+|| + ||f^-|| on the grid: the natural operator-norm scale."""
    fp = sample_mass_shell(f, +1, grid, mass=S.mass)
    fm = sample_mass_shell(f, -1, grid, mass=S.mass)
    return fp.norm() + fm.norm()


@dataclass(frozen=True)
class Gaussian1D:
    """amp * exp(-(x-c)^2/(2 sigma^2) + i q (x-c)); unitary-convention ft."""

    center: float
    sigma: float
    q: float = 0.0
    amplitude: complex = 1.0

    def __call__(self, x):
        d = np.asarray(x) - self.center
        return self.amplitude * np.exp(-d ** 2 / (2 * self.sigma ** 2)
                                       + 1j * self.q * d)

    def fourier(self, p):
        """(1/sqrt(2pi)) \\int f(x) e^{i p x} dx, entire in p."""
        p = np.asarray(p, dtype=complex)
        v = p + self.q
        return (self.amplitude * self.sigma * np.exp(1j * p * self.center)
                * np.exp(-self.sigma ** 2 * v ** 2 / 2))

    def norm_l2_sq(self):
        return abs(self.amplitude) ** 2 * self.sigma * math.sqrt(math.pi)


@dataclass(frozen=True)
class Bump1D:
    """amp * g((x-c)/h) on [c-h, c+h]."""

    center: float
    half_width: float
    amplitude: complex = 1.0
    order: int = 64

    def __call__(self, x):
        u = (np.asarray(x) - self.center) / self.half_width
        return self.amplitude * _bump_profile(u)

    def fourier(self, p):
        p = np.asarray(p, dtype=complex)
        im_max = float(np.max(np.abs(p.imag))) * (abs(self.center) + self.half_width)
        if im_max > EXP_BUDGET:
            raise QuadratureOverflowError(
                f"imaginary phase {im_max:.1f} exceeds budget {EXP_BUDGET}")
        order = _auto_order(self.order, float(np.max(np.abs(p))) * self.half_width)
        u, w = _leggauss(order)
        x = self.center + self.half_width * u
        f = _bump_profile(u)
        return (np.exp(1j * np.multiply.outer(p, x))
                * (f * w * self.half_width)).sum(axis=-1) / math.sqrt(2 * math.pi)

    def norm_l2_sq(self, order=256):
        u, w = _leggauss(order)
        return abs(self.amplitude) ** 2 * self.half_width * float(
            np.sum(_bump_profile(u) ** 2 * w))


def timezero_samples(f1d, grid, mass=1.0):
    """Mass-shell samples of a 1-D function: fhat(t) = ft(mass*sinh t)."""
    vals = f1d.fourier(mass * np.sinh(grid.nodes.astype(complex)))
    fhat = WaveFunction1(grid, vals)
    fhat_minus = WaveFunction1(grid, vals[::-1])   # fhat(-t); grid symmetric
    return fhat, fhat_minus


def timezero_field(S, f1d, which, Phi):
    """Time-zero field (position type) or its conjugate momentum.

    varphi(f) = z^dag(fhat) + z(fhat_-);
    pi(f)     = i (z^dag(omega fhat) - z(omega fhat_-)).
    """
    grid = Phi.grid
    fhat, fhat_m = timezero_samples(f1d, grid, mass=S.mass)
    if which == "varphi":
        return create(S, fhat, Phi).add(annihilate(S, fhat_m, Phi))
    if which == "pi":
        omega = S.mass * np.cosh(grid.nodes)
        a = create(S, WaveFunction1(grid, omega * fhat.values), Phi)
        b = annihilate(S, WaveFunction1(grid, omega * fhat_m.values), Phi)
        return a.sub(b).scaled(1j)
    raise ValueError(f"unknown time-zero field {which!r}")


def nonlocality_witness(S, f, g, grid):
    """Two-particle part of [phi(f), phi(g)] Omega, twice over.

    Returns (operator tensor, closed-form tensor); the closed form is
    (f+(t1) g+(t2) - g+(t1) f+(t2)) (1 - S2(t2 - t1)) / sqrt(2) sampled on
    the grid.  Both vanish identically iff S2 = 1 or f = g.
    """
    omega = FockVector.vacuum(grid)
    commutator = field_phi(S, f, field_phi(S, g, omega)).sub(
        field_phi(S, g, field_phi(S, f, omega)))
    op_tensor = symmetrize(S, commutator.component(2), grid)

    fp = sample_mass_shell(f, +1, grid, mass=S.mass).values
    gp = sample_mass_shell(g, +1, grid, mass=S.mass).values
    M = node_matrix(S, grid)
    closed = (np.multiply.outer(fp, gp) - np.multiply.outer(gp, fp)) \
        * (1.0 - M.T) / math.sqrt(2)
    return op_tensor, closed
