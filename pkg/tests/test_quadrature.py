import math

import numpy as np
import pytest
from scipy.integrate import quad

from berezin_lab import (
    Scheme,
    WeightedMeasure,
    dilation_identity_check,
    inflate,
    inflation_constant,
    inflation_constant_mc,
    integrate,
    make_domain,
    monomial_moment,
    monomial_moment_mc,
    monte_carlo_rule,
    polar_tensor_rule,
    radial_rule,
)
from berezin_lab.errors import (BoundaryError, CapabilityError, NumericError,
                                ParameterError)

DISK = make_domain("disk")
BALL2 = make_domain("ball", n=2)


def disk_moment_quad_oracle(k, r):
    """1D radial quadrature oracle: 2 pi int_0^1 rho^{2k+1} (1-rho^2)^r d rho."""
    val, _ = quad(lambda t: t ** (2 * k + 1) * (1 - t * t) ** r, 0.0, 1.0,
                  epsabs=1e-14, epsrel=1e-14)
    return 2 * np.pi * val


def test_disk_moments_against_radial_oracle():
    for r in (0.0, 1.0, 2.5):
        meas = WeightedMeasure(DISK, r)
        for k in (0, 1, 3, 10):
            closed = monomial_moment(meas, [k])
            oracle = disk_moment_quad_oracle(k, r)
            assert closed == pytest.approx(oracle, rel=1e-12)
    # spec spot values
    assert monomial_moment(WeightedMeasure(DISK, 0.0), [0]) == pytest.approx(np.pi)
    assert monomial_moment(WeightedMeasure(DISK, 0.0), [1]) == pytest.approx(np.pi / 2)


def test_ball_volume_against_mc_oracle():
    meas = WeightedMeasure(BALL2, 0.0)
    vol = monomial_moment(meas, [0, 0])
    assert vol == pytest.approx(np.pi ** 2 / 2, rel=1e-13)
    est = monomial_moment_mc(meas, [0, 0], samples=400_000, seed=11)
    assert abs(est.value - vol) < 3 * est.stderr


def test_moment_argument_errors():
    meas = WeightedMeasure(DISK, 0.0)
    with pytest.raises(ParameterError):
        monomial_moment(meas, [0, 1])
    with pytest.raises(ParameterError):
        monomial_moment(meas, [-1])
    with pytest.raises(ParameterError):
        WeightedMeasure(DISK, -0.5)


def test_custom_domain_needs_rule():
    from berezin_lab import CustomDomain
    blob = CustomDomain("blob", 1, rho=lambda z: np.atleast_1d(np.abs(z[..., 0]) ** 2 - 1),
                        grad_rho=lambda z: np.conj(z), hessian=lambda p, x, y: 1.0)
    with pytest.raises(CapabilityError):
        monomial_moment(WeightedMeasure(blob, 0.0), [0])


def test_moments_decreasing_along_coordinate_chains():
    # adding one step to any coordinate strictly decreases the moment
    for meas in (WeightedMeasure(DISK, 0.0), WeightedMeasure(DISK, 1.5)):
        vals = [monomial_moment(meas, [k]) for k in range(41)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    meas = WeightedMeasure(BALL2, 1.0)
    for alpha in ([0, 0], [3, 2], [10, 7], [20, 19]):
        base = monomial_moment(meas, alpha)
        for j in range(2):
            step = list(alpha)
            step[j] += 1
            assert monomial_moment(meas, step) < base


def test_polar_tensor_disk_exactness():
    # degree <= 2*order-1 polynomial moments against closed forms, 1e-12 relative
    for r in (0.0, 1.0, 2.5):
        meas = WeightedMeasure(DISK, r)
        rule = polar_tensor_rule(meas, radial_order=128, angular_order=256)
        assert rule.scheme is Scheme.POLAR_TENSOR
        assert np.all(rule.weights > 0)
        assert np.all(np.atleast_1d(DISK.rho(rule.nodes)) < 0)
        for k in (0, 1, 5, 40, 120):
            got = integrate(lambda z, k=k: np.abs(z[:, 0]) ** (2 * k), meas, rule)
            want = monomial_moment(meas, [k])
            assert abs(got.real - want) / want < 1e-12
            assert abs(got.imag) < 1e-14


def test_integrate_examples():
    meas0 = WeightedMeasure(DISK, 0.0)
    rule0 = polar_tensor_rule(meas0, radial_order=96)
    one = lambda z: np.ones(len(z))
    assert integrate(one, meas0, rule0).real == pytest.approx(np.pi, abs=1e-12)
    meas1 = WeightedMeasure(DISK, 1.0)
    rule1 = polar_tensor_rule(meas1, radial_order=96)
    assert integrate(one, meas1, rule1).real == pytest.approx(np.pi / 2, abs=1e-10)
    f = lambda z: np.abs(z[:, 0]) ** 2
    assert integrate(f, meas0, rule0).real == pytest.approx(np.pi / 2, abs=1e-10)


def test_integrate_linearity_and_positivity():
    meas = WeightedMeasure(DISK, 1.0)
    rule = polar_tensor_rule(meas, radial_order=64)
    f = lambda z: np.abs(z[:, 0]) ** 2
    g = lambda z: np.real(z[:, 0]) + 1.0
    lin = integrate(lambda z: 2 * f(z) + 3j * g(z), meas, rule)
    assert lin == pytest.approx(2 * integrate(f, meas, rule) + 3j * integrate(g, meas, rule))
    assert integrate(g, meas, rule).real > 0


def test_integrate_reports_bad_node():
    meas = WeightedMeasure(DISK, 0.0)
    rule = polar_tensor_rule(meas, radial_order=16)

    def bad(z):
        out = np.ones(len(z), dtype=complex)
        out[7] = np.nan
        return out

    with pytest.raises(NumericError) as err:
        integrate(bad, meas, rule)
    assert err.value.node is not None


def test_radial_rule_matches_full_rule_for_radial_integrands():
    meas = WeightedMeasure(make_domain("egg", m=2), 1.0)
    rad = radial_rule(meas, order=96)
    assert rad.radial_only
    f = lambda z: np.abs(z[:, 0]) ** 2 * np.abs(z[:, 1]) ** 4
    got = integrate(f, meas, rad)
    want = monomial_moment(meas, [1, 2])
    assert got.real == pytest.approx(want, rel=5e-6)


def test_monte_carlo_rule_reproducible_and_interior():
    meas = WeightedMeasure(BALL2, 0.0)
    rule_a = monte_carlo_rule(meas, samples=200_000, seed=9)
    rule_b = monte_carlo_rule(meas, samples=200_000, seed=9)
    assert np.array_equal(rule_a.nodes, rule_b.nodes)
    assert rule_a.scheme is Scheme.MONTE_CARLO
    assert np.all(np.atleast_1d(BALL2.rho(rule_a.nodes)) < 0)
    vol = integrate(lambda z: np.ones(len(z)), meas, rule_a).real
    assert vol == pytest.approx(np.pi ** 2 / 2, rel=0.02)


def test_inflation_constant_closed_forms():
    assert inflation_constant(1, 1.0) == pytest.approx(np.pi, rel=1e-14)
    for p in (1, 2, 3):
        assert inflation_constant(p, float(p)) == pytest.approx(
            np.pi ** p / math.factorial(p), rel=1e-12)
    with pytest.raises(ParameterError):
        inflation_constant(1, 1.5)
    with pytest.raises(ParameterError):
        inflation_constant(2, 0.0)


def test_inflation_constant_mc_agreement_small():
    for p, r in ((1, 1.0), (2, 1.0), (2, 0.5)):
        cf = inflation_constant(p, r)
        est = inflation_constant_mc(p, r, samples=400_000, seed=42)
        assert abs(cf - est.value) < 3 * est.stderr


def test_inflation_constant_mc_bit_reproducible():
    a = inflation_constant_mc(2, 1.0, samples=300_000, seed=123)
    b = inflation_constant_mc(2, 1.0, samples=300_000, seed=123)
    assert a.value == b.value and a.stderr == b.stderr


def test_inflated_moment_mc_cross_check():
    # inflated Reinhardt moments (Dirichlet closed form) vs MC, once per (p, r)
    for p, r in ((1, 1.0), (2, 2.0)):
        infl = inflate(DISK, p, r)
        meas = WeightedMeasure(infl, 0.0)
        alpha = [1] + [1] * p
        closed = monomial_moment(meas, alpha)
        est = monomial_moment_mc(meas, alpha, samples=400_000, seed=21)
        assert abs(closed - est.value) < 4 * est.stderr


def test_dilation_identity_check():
    chk = dilation_identity_check(DISK, 1, 1.0, [0.0], samples=400_000, seed=42)
    assert chk.residual < 1e-2
    assert chk.rhs_closed_form == pytest.approx(np.pi, rel=1e-12)
    chk6 = dilation_identity_check(DISK, 1, 1.0, [0.6], samples=400_000, seed=42)
    assert chk6.rhs_closed_form == pytest.approx(0.64 * np.pi, rel=1e-12)
    assert chk6.lhs == pytest.approx(0.64 * np.pi, rel=1e-2)
    chk21 = dilation_identity_check(DISK, 2, 1.0, [0.0], samples=400_000, seed=42)
    assert chk21.rhs_closed_form == pytest.approx(inflation_constant(2, 1.0), rel=1e-12)
    with pytest.raises(BoundaryError):
        dilation_identity_check(DISK, 1, 1.0, [1.5])


def test_total_mass_positive():
    for dom, r in ((DISK, 0.0), (DISK, 2.0), (BALL2, 1.0),
                   (make_domain("egg", m=3), 0.5)):
        assert WeightedMeasure(dom, r).total_mass() > 0
