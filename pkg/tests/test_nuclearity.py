import math

import numpy as np
import pytest

import wedgeqft as wq
from wedgeqft.errors import ConvergenceError, ModelError, StripError
from wedgeqft.nuclearity import (KernelOperator, log_sqrt_factorial_series,
                                 log_xi_bound_minus, modular_trace_norm)


def test_analytic_bound_formula_spot_value():
    # recompute the closed form through an independently coded expression
    a, b = 1.0, math.pi / 2
    got = wq.analytic_trace_bound(a, b)
    pref = 2 ** 0.25 * math.pi ** 0.75
    damp = math.exp(-a) * a ** -0.25 * math.sqrt(math.sqrt(math.pi / 2) + 0.25 / a)
    tail = math.sqrt((b ** 4 + 4 * b ** 2 + 24) / b ** 5)
    assert abs(got - pref * damp * tail) < 1e-14
    assert abs(wq.analytic_trace_bound(a, -b) - got) == 0


def test_analytic_bound_limits():
    assert wq.analytic_trace_bound(60.0, 1.0) < 1e-20
    assert wq.analytic_trace_bound(1.0, 0.1) > wq.analytic_trace_bound(1.0, 1.0)
    with pytest.raises(ValueError):
        wq.analytic_trace_bound(0.0, 1.0)
    with pytest.raises(ValueError):
        wq.analytic_trace_bound(1.0, 0.0)


def test_trace_norm_below_bound_and_converged():
    for a in (0.5, 2.0):
        for b in (math.pi / 8, math.pi / 2):
            r = wq.trace_norm_estimate(KernelOperator("general", (a, b)),
                                       refine=True)
            assert r.converged and r.rel_change < 1e-3
            assert r.value <= wq.analytic_trace_bound(a, b)


def test_trace_norm_strong_damping_vanishes():
    r = wq.trace_norm_estimate(KernelOperator("general", (50.0, 1.0)),
                               refine=False)
    assert r.value < 1e-15


def test_trace_norm_sign_symmetry():
    vp = wq.trace_norm_estimate(KernelOperator("general", (1.0, 0.6)),
                                refine=False).value
    vm = wq.trace_norm_estimate(KernelOperator("general", (1.0, -0.6)),
                                refine=False).value
    assert abs(vp - vm) < 1e-10


def test_modular_kernel_decreasing_and_mapped_bound(resonance):
    kap = math.pi / 8
    vals = [modular_trace_norm(resonance, s, kap).value for s in (0.5, 1.0, 2.0)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    for s, v in zip((0.5, 1.0, 2.0), vals):
        mapped = wq.analytic_trace_bound(resonance.mass * s / 2, kap / 2) / math.pi
        assert v <= mapped


def test_sigma_formula_second_path(ising):
    # independent re-derivation: evaluate the double-distance form at s/2
    s, kap = 1.0, math.pi / 4
    got = wq.sigma(ising, s, kap, sup_norm=1.0)
    m = ising.mass
    kmax = wq.kappa(ising)

    def doubled(s2x):   # constant as a function of twice the half-distance
        return (2 * math.sqrt(2) * math.exp(-2 * m * s2x * math.cos(kap))
                / math.sqrt(m * s2x * math.cos(kap) * (kmax - kap)))

    assert abs(got - doubled(s / 2)) < 1e-14


def test_sigma_limits_and_domain(ising, resonance):
    assert wq.sigma(ising, 80.0, math.pi / 4) < 1e-20
    assert wq.sigma(ising, 1e-8, math.pi / 4) > 1e3
    vals = [wq.sigma(resonance, s, math.pi / 8) for s in (0.5, 1, 2, 4)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    with pytest.raises(StripError):
        wq.sigma(resonance, 1.0, math.pi / 3)    # kappa >= kappa(S)
    with pytest.raises(StripError):
        wq.sigma(wq.build_model(-1, a=0.7), 1.0, 0.3)


def test_series_against_brute_force():
    # independent oracle: partial sums with exact factorials
    def brute(x):
        total, n = 0.0, 0
        while True:
            term = x ** n / math.sqrt(math.factorial(n))
            total += term
            if n > 5 and term < 1e-17 * total:
                return total
            n += 1
    for x in (0.0, 0.3, 1.0, 2.7):
        assert abs(wq.sqrt_factorial_series(x) - brute(x)) < 1e-12 * brute(x)
    assert abs(wq.sqrt_factorial_series(1.0) - 3.4695) < 1e-3


def test_series_log_large_argument():
    x = 150.0
    lv = log_sqrt_factorial_series(x)
    # the peak term alone is a lower bound; x^2/2 an upper-scale reference
    n_peak = int(x * x)
    log_peak = n_peak * math.log(x) - 0.5 * math.lgamma(n_peak + 1)
    assert lv >= log_peak
    assert lv <= x * x


def test_xi_bound_distal_values(ising):
    # feed explicit factors so the geometric series is exercised exactly
    sup = 1.0
    sig = wq.sigma(ising, 1.0, math.pi / 4, sup_norm=sup)
    assert wq.xi_bound_distal(ising, 1.0, math.pi / 4, sup_norm=sup,
                              trace_norm=0.5 / sig) == 2.0
    assert wq.xi_bound_distal(ising, 1.0, math.pi / 4, sup_norm=sup,
                              trace_norm=1.0 / sig) == math.inf


def test_xi_bound_distal_large_distance(resonance):
    val = wq.xi_bound_distal(resonance, 30.0, math.pi / 8)
    assert 1.0 <= val < 1.0001


def test_xi_bound_minus_requires_fermionic(free):
    with pytest.raises(ModelError):
        wq.xi_bound_minus(free, 1.0, math.pi / 4)


def test_xi_bound_minus_finite_decreasing(ising, resonance):
    ivals = [log_xi_bound_minus(ising, s, math.pi / 4) for s in (0.5, 1, 2, 5)]
    assert all(math.isfinite(v) for v in ivals)
    assert all(x > y for x, y in zip(ivals, ivals[1:]))
    sup = wq.strip_sup_norm(resonance, math.pi / 8)
    rvals = [log_xi_bound_minus(resonance, s, math.pi / 8, sup_norm=sup)
             for s in (0.5, 1, 2, 5)]
    assert all(math.isfinite(v) for v in rvals)
    assert all(x > y for x, y in zip(rvals, rvals[1:]))


def test_find_s_min_resonance(resonance):
    smin = wq.find_s_min(resonance, math.pi / 8, nodes=200)
    assert 0.0 < smin < 10.0
    heavier = wq.build_model(-1, zeros=[1j * math.pi / 4], m=2.0)
    smin2 = wq.find_s_min(heavier, math.pi / 8, nodes=200)
    assert abs(smin / (2 * smin2) - 1.0) < 0.05


def test_find_s_min_objective_monotone(resonance):
    kap = math.pi / 8
    sup = wq.strip_sup_norm(resonance, kap)
    vals = [wq.sigma(resonance, s, kap, sup_norm=sup)
            * modular_trace_norm(resonance, s, kap, nodes=200).value
            for s in (0.5, 1.5, 3.0, 6.0, 12.0)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_find_s_min_bad_bracket(resonance):
    with pytest.raises(ConvergenceError):
        wq.find_s_min(resonance, math.pi / 8, bracket=(20.0, 40.0), nodes=200)


def test_free_bose_bound():
    r = wq.free_bose_bound(1.0, nodes=200)
    assert r.max_singular_phi < 1.0 and r.max_singular_pi < 1.0
    assert math.isfinite(r.value) and r.value > 1.0
    r10 = wq.free_bose_bound(10.0, nodes=200)
    assert abs(r10.value - 1.0) < 1e-3
    vals = [wq.free_bose_bound(s, nodes=200).value for s in (0.5, 1.0, 2.0)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_ising_fermi_vs_determinant():
    for s in (0.5, 1.0):
        exp_bound = wq.ising_fermi_bound(s, nodes=200)
        det_bound = wq.free_bose_bound(s, nodes=200).value
        assert math.isfinite(exp_bound)
        assert exp_bound < det_bound
    assert abs(wq.ising_fermi_bound(10.0, nodes=200) - 1.0) < 1e-3


def test_partition_bound_basics(ising, free):
    pb = wq.partition_bound(ising, 0.5, 1.0, math.pi / 4, nodes=200)
    assert pb.heuristic
    assert 0 < pb.mu < 0.25
    assert abs(pb.s_effective - math.sin(2 * math.pi * pb.mu)) < 1e-14
    improved = wq.partition_bound(ising, 0.5, 1.0, math.pi / 4, improved=True,
                                  nodes=200)
    assert pb.value == 2.0 * improved.value
    with pytest.raises(ModelError):
        wq.partition_bound(free, 0.5, 1.0, math.pi / 4)
    with pytest.raises(ValueError):
        wq.partition_bound(ising, -0.5, 1.0, math.pi / 4)


def test_partition_large_beta_approaches_modular(ising):
    pb = wq.partition_bound(ising, 1e8, 1.0, math.pi / 4, improved=True,
                            nodes=200)
    assert abs(pb.s_effective - 1.0) < 1e-8
    ref = log_xi_bound_minus(ising, 1.0, math.pi / 4,
                             trace_norm=modular_trace_norm(
                                 ising, 1.0, math.pi / 4, nodes=200).value)
    assert abs(pb.log_value - ref) < 1e-6


def test_kernel_kind_validation():
    with pytest.raises(ModelError):
        KernelOperator("general", (-1.0, 0.5)).kernel()
    with pytest.raises(ModelError):
        KernelOperator("general", (1.0, 0.0)).kernel()
    with pytest.raises(ModelError):
        KernelOperator("weird", (1.0,)).kernel()


def test_singular_values_descending():
    sv = wq.singular_values(KernelOperator("bose_phi", (1.0, 1.0), nodes=100))
    assert np.all(np.diff(sv) <= 0)
    assert np.all(sv >= 0)
