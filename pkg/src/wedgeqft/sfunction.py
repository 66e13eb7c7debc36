"""Scattering functions of factorizing S-matrices and their analytic data.

A model is fixed by a sign, an exponential rate and a finite list of zeros
in the half-strip 0 < Im(beta) <= pi/2 of the rapidity plane:

    S2(z) = eps * exp(i*a*sinh z) * prod_k (sinh b_k - sinh z)/(sinh b_k + sinh z)

On the real line S2 is a phase and satisfies unitarity, crossing and
hermitian analyticity; these identities are what :func:`verify_relations`
samples.  The derived quantities computed here (analyticity margin of the
zero set, sup norm on an enlarged strip, phase shift, pair-exchange phase
products) feed the locality and nuclearity checks downstream.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import cmath
import math

import numpy as np

from .errors import ModelError, PoleProximityError, StripError

HALF_PI = math.pi / 2

# |sinh(b_k) + sinh(z)| below this floor counts as sitting on a pole
POLE_FLOOR_DEFAULT = 1e-12


@dataclass(frozen=True)
class ScatteringFunction:
    """Immutable scattering-function model.

    ``epsilon`` is the value at the origin (+1 or -1), ``a`` the
    nonnegative coefficient of ``sinh`` in the exponential prefactor,
    ``zeros`` the finite tuple of zeros in the closed half strip
    ``0 < Im(b) <= pi/2`` and ``mass`` the particle mass used by all
    downstream modules.

    The constructor validates only per-zero constraints.  Mirror pairing
    of off-axis zeros (needed for crossing symmetry) is enforced by
    :func:`build_model`; instantiating directly with an unpaired zero is
    allowed so broken models can be exercised as negative controls.
    """

    epsilon: int
    a: float = 0.0
    zeros: tuple = ()
    mass: float = 1.0
    pole_floor: float = field(default=POLE_FLOOR_DEFAULT, compare=False)

    def __post_init__(self):
        if self.epsilon not in (+1, -1):
            raise ModelError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if not (self.a >= 0.0):
            raise ModelError(f"exponential rate a must be >= 0, got {self.a}")
        if not (self.mass > 0.0):
            raise ModelError(f"mass must be positive, got {self.mass}")
        object.__setattr__(self, "zeros", tuple(complex(b) for b in self.zeros))
        for b in self.zeros:
            if not (0.0 < b.imag <= HALF_PI):
                raise ModelError(
                    f"zero {b} violates 0 < Im(beta) <= pi/2")

    @property
    def is_constant(self):
        return self.a == 0.0 and not self.zeros

    def __call__(self, zeta):
        return evaluate(self, zeta)


@dataclass(frozen=True)
class StripNormCache:
    """A strip half-width and the sup norm of |S2| on the enlarged strip."""

    kappa: float
    sup_norm: float

    def __post_init__(self):
        if not (self.kappa > 0.0):
            raise ModelError(f"kappa must be positive, got {self.kappa}")
        if not (self.sup_norm >= 1.0):
            raise ModelError(
                f"strip sup norm must be >= 1, got {self.sup_norm}")


def _mirror_partner(b):
    return complex(-b.real, b.imag)


def build_model(epsilon, a=0.0, zeros=(), m=1.0, auto_mirror=True,
                pole_floor=POLE_FLOOR_DEFAULT):
    """Construct and validate a scattering-function model.

    Zeros with nonzero real part must come in mirror pairs (b, -conj(b));
    with ``auto_mirror`` a one-sided zero may be given once and the partner
    is added automatically.  Purely imaginary zeros stand alone.

    Raises :class:`ModelError` for zeros outside the half strip, negative
    ``a``, nonpositive mass, or unpaired off-axis zeros when auto-mirroring
    is disabled.
    """
    zs = [complex(b) for b in zeros]
    for b in zs:
        if not (0.0 < b.imag <= HALF_PI):
            raise ModelError(f"zero {b} violates 0 < Im(beta) <= pi/2")

    on_axis = [b for b in zs if b.real == 0.0]
    off_axis = [b for b in zs if b.real != 0.0]
    if auto_mirror:
        paired = []
        pool = list(off_axis)
        while pool:
            b = pool.pop(0)
            partner = _mirror_partner(b)
            if partner in pool:
                pool.remove(partner)
                paired.extend([b, partner])
            else:
                paired.extend([b, partner])
        off_axis = paired
    else:
        pool = list(off_axis)
        while pool:
            b = pool.pop(0)
            partner = _mirror_partner(b)
            if partner in pool:
                pool.remove(partner)
            else:
                raise ModelError(
                    f"zero {b} lacks its mirror partner {partner} and "
                    "auto-mirroring is disabled")

    return ScatteringFunction(epsilon=int(epsilon), a=float(a),
                              zeros=tuple(on_axis + off_axis), mass=float(m),
                              pole_floor=pole_floor)


def evaluate(S, zeta):
    """Evaluate S2 at (an array of) complex rapidity.

    Uses the product representation; 2*pi*i periodicity is automatic.
    Raises :class:`PoleProximityError` when any |sinh(b_k) + sinh(z)|
    falls below the model's pole floor.
    """
    z = np.asarray(zeta, dtype=complex)
    sz = np.sinh(z)
    out = np.full(z.shape, complex(S.epsilon), dtype=complex)
    if S.a != 0.0:
        out = out * np.exp(1j * S.a * sz)
    for b in S.zeros:
        sb = cmath.sinh(b)
        den = sb + sz
        if np.min(np.abs(den)) < S.pole_floor:
            raise PoleProximityError(
                f"evaluation within {S.pole_floor} of the pole mirroring "
                f"zero {b}")
        out = out * (sb - sz) / den
    if np.isscalar(zeta) or np.ndim(zeta) == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class RelationReport:
    """Max residuals of the defining identities on a real sample set."""

    unitarity: float
    symmetry: float          # S2(-t) vs 1/S2(t)
    crossing: float          # S2(t + i*pi) vs 1/S2(t)
    modulus: float           # ||S2(t)| - 1|
    tol: float

    @property
    def passed(self):
        return max(self.unitarity, self.symmetry,
                   self.crossing, self.modulus) <= self.tol

    @property
    def max_residual(self):
        return max(self.unitarity, self.symmetry, self.crossing, self.modulus)

    def as_dict(self):
        return {"unitarity": self.unitarity, "symmetry": self.symmetry,
                "crossing": self.crossing, "modulus": self.modulus,
                "tol": self.tol, "passed": self.passed}


def verify_relations(S, thetas, tol):
    """Check unitarity, symmetry, crossing and unimodularity on samples."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = np.asarray(thetas, dtype=float)
    v = evaluate(S, t)
    inv = 1.0 / v
    r_uni = np.max(np.abs(np.conj(v) - inv))
    r_sym = np.max(np.abs(evaluate(S, -t) - inv))
    r_cross = np.max(np.abs(evaluate(S, t + 1j * math.pi) - inv))
    r_mod = np.max(np.abs(np.abs(v) - 1.0))
    return RelationReport(float(r_uni), float(r_sym), float(r_cross),
                          float(r_mod), float(tol))


def kappa(S):
    """Analyticity margin: least Im(beta) over the zeros, capped at pi/2.

    An empty zero list yields the cap, which keeps cos(kappa) > 0 in every
    downstream formula.
    """
    if not S.zeros:
        return HALF_PI
    return min(HALF_PI, min(b.imag for b in S.zeros))


# strip_sup_norm search defaults
_WINDOW = 30.0
_SAMPLES = 10_000
_GOLDEN_TOL = 1e-12


def _golden_max(f, lo, hi, tol=_GOLDEN_TOL):
    """Golden-section maximization of a unimodal-enough 1-D function."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd)


def strip_sup_norm(S, kap, window=_WINDOW, samples=_SAMPLES):
    """Sup of |S2| over the closed strip S(-kappa, pi+kappa).

    By the boundary symmetries it suffices to maximize |S2(t - i*kappa)|
    over real t; |S2| <= 1 holds on the physical strip so the result is
    floored at 1.  The tail limit |S2| -> 1 covers |t| beyond the window.
    Requires a = 0 (otherwise the sup is infinite) and kappa < kappa(S).
    """
    kmax = kappa(S)
    if not (0.0 < kap < kmax):
        raise StripError(f"kappa must lie in (0, {kmax}), got {kap}")
    if S.a != 0.0:
        raise StripError(
            "strip sup norm is infinite for a > 0; the bounded family "
            "requires a = 0")
    if not S.zeros:
        return 1.0

    t = np.linspace(-window, window, samples)
    vals = np.abs(evaluate(S, t - 1j * kap))
    i = int(np.argmax(vals))
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, samples - 1)]
    peak = _golden_max(lambda x: abs(evaluate(S, x - 1j * kap)), lo, hi)
    return max(1.0, float(peak), float(vals[-1]), float(vals[0]))


def strip_norm_cache(S, kap=None):
    """Bundle a strip half-width with the computed sup norm."""
    if kap is None:
        kap = kappa(S) / 2
    return StripNormCache(kappa=float(kap), sup_norm=strip_sup_norm(S, kap))


def phase_shift(S, zeta, _nsub=8):
    """Phase shift delta with S2(z) = S2(0) exp(2*i*delta(z)), delta(0) = 0.

    The branch is tracked continuously along the path 0 -> Re(z) -> z;
    steps are refined adaptively until each log increment is unambiguous.
    delta is odd and real on the real line.  Points outside the open strip
    |Im z| < kappa(S) are rejected.
    """
    z = complex(zeta)
    if abs(z.imag) >= kappa(S):
        raise StripError(
            f"zeta={z} outside the analyticity strip |Im| < {kappa(S)}")

    s0 = evaluate(S, 0.0)

    def g(w):
        return evaluate(S, w) / s0

    total = 0.0 + 0.0j
    for start, end in ((0.0 + 0.0j, complex(z.real, 0.0)),
                       (complex(z.real, 0.0), z)):
        if end == start:
            continue
        n = _nsub
        while True:
            pts = start + (end - start) * np.arange(n + 1) / n
            vals = g(pts)
            ratios = vals[1:] / vals[:-1]
            # |log ratio| < 0.5 keeps the principal branch unambiguous
            if np.max(np.abs(np.log(ratios))) < 0.5 or n > 2 ** 20:
                total += np.sum(np.log(ratios))
                break
            n *= 2
    return total / 2j


def y_phase(S, sign, zetas):
    """Product of pair-exchange phases prod_{k<l} sign * exp(i*delta(z_k - z_l)).

    For n <= 1 the empty product is 1.  Real inputs give a unimodular value.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    zs = [complex(z) for z in zetas]
    out = 1.0 + 0.0j
    for k in range(len(zs)):
        for l in range(k + 1, len(zs)):
            out *= sign * cmath.exp(1j * phase_shift(S, zs[k] - zs[l]))
    return out


@lru_cache(maxsize=64)
def _node_matrix_cached(S, grid):
    t = grid.nodes
    return evaluate(S, t[:, None] - t[None, :])


def node_matrix(S, grid):
    """Matrix M[i, j] = S2(theta_i - theta_j) on a rapidity grid (cached)."""
    M = _node_matrix_cached(S, grid)
    M.setflags(write=False)
    return M
