import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

import wedgeqft as wq
from wedgeqft.errors import QuadratureOverflowError
from wedgeqft.fields import (field_norm_scale, sample_mass_shell,
                             timezero_samples)
from wedgeqft.fock import FockVector


@pytest.fixture(scope="module")
def gaussian():
    return wq.Gaussian2D.isotropic((0.2, -0.3), 1.1, q=(0.4, 0.7))


@pytest.fixture(scope="module")
def bump():
    return wq.Bump2D((-0.3, 0.4, 0.9, 1.9))


def test_gaussian_fourier_against_quadrature(gaussian):
    # brute-force the double Fourier integral at a few momenta
    for (p0, p1) in [(0.5, -0.3), (1.2, 0.8)]:
        def integrand(x0, x1, part):
            v = gaussian(x0, x1) * np.exp(1j * (p0 * x0 - p1 * x1))
            return v.real if part == "re" else v.imag

        re = quad(lambda x0: quad(lambda x1: integrand(x0, x1, "re"),
                                  -12, 12, limit=200)[0], -12, 12, limit=200)[0]
        im = quad(lambda x0: quad(lambda x1: integrand(x0, x1, "im"),
                                  -12, 12, limit=200)[0], -12, 12, limit=200)[0]
        want = (re + 1j * im) / (2 * math.pi)
        assert abs(gaussian.fourier(p0, p1) - want) < 1e-9


def test_bump_support_and_wedges(bump):
    assert bump(0.0, 1.4) != 0
    assert bump(0.0, 2.1) == 0
    assert wq.in_wedge(bump.box, "R")
    assert not wq.in_wedge(bump.box, "L")
    assert wq.in_wedge(bump.star().box, "L")


def test_conjugate_pair_identity(gaussian, bump):
    # (conj f)^+ = conj(f^-) at real rapidity
    t = np.linspace(-3, 3, 11).astype(complex)
    for f in (gaussian, bump):
        lhs = wq.mass_shell(f.conj(), +1, t)
        rhs = np.conj(wq.mass_shell(f, -1, t))
        assert_allclose(lhs, rhs, atol=1e-14)


def test_half_period_contour_identity(bump):
    # entire transform: f^+(t - i pi) = f^-(t) for compact support
    t = np.linspace(-2, 2, 9)
    lhs = wq.mass_shell(bump, +1, t - 1j * math.pi)
    rhs = wq.mass_shell(bump, -1, t.astype(complex))
    assert_allclose(lhs, rhs, atol=1e-14)


def test_klein_gordon_symbol():
    # the on-shell symbol -p(z)^2 + m^2 vanishes identically, so the wave
    # operator annihilates every mass-shell restriction
    rng = np.random.default_rng(0)
    z = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    for m in (1.0, 2.5):
        p0 = m * np.cosh(z)
        p1 = m * np.sinh(z)
        assert np.max(np.abs(-(p0 ** 2 - p1 ** 2) + m ** 2)) < 1e-10


def test_star_is_reflected_conjugate(gaussian, bump):
    pts = [(-0.7, 0.4), (0.3, -1.2)]
    for f in (gaussian, bump):
        g = f.star()
        for (x0, x1) in pts:
            assert abs(g(x0, x1) - np.conj(f(-x0, -x1))) < 1e-14


def test_time_reflected(gaussian, bump):
    for f in (gaussian, bump):
        g = f.time_reflected()
        for (x0, x1) in [(0.2, 1.1), (-0.5, -0.8)]:
            assert abs(g(x0, x1) - np.conj(f(-x0, x1))) < 1e-14


def test_gaussian_poincare_transform(gaussian):
    lam, x = 0.6, (0.5, -0.7)
    moved = gaussian.transformed(x, lam)
    ch, sh = math.cosh(-lam), math.sinh(-lam)
    for (y0, y1) in [(0.3, 0.9), (-1.0, 0.2)]:
        d0, d1 = y0 - x[0], y1 - x[1]
        back = (ch * d0 + sh * d1, sh * d0 + ch * d1)
        assert abs(moved(y0, y1) - gaussian(*back)) < 1e-13


def test_translation_pulls_out_phase(bump, shg):
    # (f_x)^+ = e^{i p.x} f^+ at real rapidity
    x = (0.4, -0.9)
    t = np.linspace(-2.5, 2.5, 11)
    moved = bump.transformed(x)
    phase = np.exp(1j * (np.cosh(t) * x[0] - np.sinh(t) * x[1]))
    assert_allclose(wq.mass_shell(moved, +1, t.astype(complex)),
                    phase * wq.mass_shell(bump, +1, t.astype(complex)),
                    atol=1e-14)


def test_quadrature_overflow_guard(bump):
    with pytest.raises(QuadratureOverflowError):
        wq.mass_shell(bump, +1, 8.0 + 1.4j)


def test_field_phi_on_vacuum(shg, gaussian, grid41):
    om = FockVector.vacuum(grid41)
    out = wq.field_phi(shg, gaussian, om)
    fp = sample_mass_shell(gaussian, +1, grid41)
    assert_allclose(out.component(1), fp.values, atol=0)
    assert abs(out.component(0)) == 0


def test_field_bound(shg, gaussian, grid21, rng):
    Phi = wq.random_fock(shg, grid21, 2, rng)
    out = wq.field_phi(shg, gaussian, Phi)
    assert out.norm() <= (field_norm_scale(shg, gaussian, grid21)
                          * Phi.number_half_power(1.0).norm() + 1e-12)


def test_field_adjoint(shg, gaussian, grid21, rng):
    Phi = wq.random_fock(shg, grid21, 2, rng)
    Psi = wq.random_fock(shg, grid21, 3, rng)
    lhs = wq.field_phi(shg, gaussian, Phi).inner(Psi)
    rhs = Phi.inner(wq.field_phi(shg, gaussian.conj(), Psi))
    assert abs(lhs - rhs) < 1e-12


def test_field_covariance(shg, gaussian, grid41, rng):
    Phi = wq.random_fock(shg, grid41, 2, rng, margin=3)
    lam = 2 * grid41.spacing
    x = (0.5, -0.7)
    g = wq.PoincareElement(x, lam)
    lhs = wq.poincare_apply(
        shg, g, wq.field_phi(shg, gaussian,
                             wq.poincare_apply(shg, g.inverse(), Phi)))
    rhs = wq.field_phi(shg, gaussian.transformed(x, lam), Phi)
    assert lhs.sub(rhs).norm() / Phi.norm() < 1e-10


def test_prime_field_on_vacuum_and_coincidence(catalogue, gaussian, grid21, rng):
    free = catalogue["free"]
    shg = catalogue["shg"]
    om = FockVector.vacuum(grid21)
    fp = sample_mass_shell(gaussian, +1, grid21)
    assert_allclose(wq.field_phi_prime(shg, gaussian, om).component(1),
                    fp.values, atol=1e-14)
    Phi = wq.random_fock(free, grid21, 2, rng)
    d = wq.field_phi_prime(free, gaussian, Phi).sub(
        wq.field_phi(free, gaussian, Phi)).norm()
    assert d / Phi.norm() < 1e-12
    Phi = wq.random_fock(shg, grid21, 2, rng)
    d = wq.field_phi_prime(shg, gaussian, Phi).sub(
        wq.field_phi(shg, gaussian, Phi)).norm()
    assert d / Phi.norm() > 1e-3      # genuinely different fields


def test_two_point_function_model_independent(catalogue, gaussian, grid41):
    g2 = wq.Gaussian2D.isotropic((-0.4, 0.6), 0.9, q=(-0.2, 0.3))
    vals = []
    for S in catalogue.values():
        om = FockVector.vacuum(grid41)
        vals.append(om.inner(wq.field_phi(S, gaussian,
                                          wq.field_phi(S, g2, om))))
    assert max(abs(v - vals[0]) for v in vals) < 1e-10


def test_gamma_covariance(shg, gaussian, grid21, rng):
    Phi = wq.random_fock(shg, grid21, 2, rng)
    lhs = wq.reflect_gamma(wq.field_phi(shg, gaussian, wq.reflect_gamma(Phi)))
    rhs = wq.field_phi(shg, gaussian.time_reflected(), Phi)
    assert lhs.sub(rhs).norm() / Phi.norm() < 1e-12


def test_timezero_hermiticity_and_norms(shg, grid21, rng):
    f1 = wq.Gaussian1D(0.3, 0.8)
    Phi = wq.random_fock(shg, grid21, 2, rng)
    Psi = wq.random_fock(shg, grid21, 3, rng)
    for which in ("varphi", "pi"):
        lhs = wq.timezero_field(shg, f1, which, Phi).inner(Psi)
        rhs = Phi.inner(wq.timezero_field(shg, f1, which, Psi))
        assert abs(lhs - rhs) < 1e-12
    # pi(f) Omega has no scalar component
    om = FockVector.vacuum(grid21)
    assert abs(wq.timezero_field(shg, f1, "pi", om).component(0)) == 0


@pytest.mark.parametrize("f1", [wq.Gaussian1D(0.3, 0.8),
                                wq.Bump1D(-0.2, 0.9)])
def test_energy_weighted_norm_identity(f1):
    # int m cosh(t) |fhat(t)|^2 dt = ||f||_2^2 via the change of variables
    t = np.linspace(-9, 9, 6001)
    fh = f1.fourier(np.sinh(t).astype(complex))
    lhs = np.trapezoid(np.cosh(t) * np.abs(fh) ** 2, t)
    assert abs(lhs - f1.norm_l2_sq()) < 1e-8


def test_timezero_minus_sampling(shg, grid21):
    f1 = wq.Gaussian1D(0.4, 0.7, q=0.3)
    fhat, fhat_m = timezero_samples(f1, grid21)
    assert_allclose(fhat_m.values, fhat.values[::-1], atol=0)


def test_nonlocality_witness(catalogue, grid41):
    f = wq.Bump2D((-0.3, 0.4, 0.9, 1.9))
    g = wq.Bump2D((-0.2, 0.35, -2.0, -1.0))
    shg = catalogue["shg"]
    op, closed = wq.nonlocality_witness(shg, f, g, grid41)
    assert np.max(np.abs(op - closed)) < 1e-10 * max(np.max(np.abs(closed)), 1)
    assert np.max(np.abs(closed)) > 0
    op_free, closed_free = wq.nonlocality_witness(catalogue["free"], f, g, grid41)
    assert np.max(np.abs(op_free)) < 1e-14
    assert np.max(np.abs(closed_free)) == 0
    op_same, _ = wq.nonlocality_witness(shg, f, f, grid41)
    assert np.max(np.abs(op_same)) < 1e-14
    # Ising with spacelike-separated supports: nonzero witness
    op_ising, _ = wq.nonlocality_witness(catalogue["ising"], f, g, grid41)
    assert np.max(np.abs(op_ising)) > 0
