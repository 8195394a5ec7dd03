import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraccomm import norms as Nm
from fraccomm import spectral
from fraccomm.grid import (
    Gaussian,
    GridError,
    GridFunction,
    RandomTrig,
    Torus,
    TruncatedLine,
    WavePacket,
    default_family,
    make_domain,
    sample_family,
)


def besov_sobolev_constant(n, s):
    """``B^s_{2,2}`` seminorm over ``||D^s u||_2`` from the Fourier side."""
    return math.sqrt(2 * math.pi ** (n / 2) * math.gamma(1 - s) / (s * 4**s * math.gamma(n / 2 + s)))


@pytest.fixture(scope="module")
def step():
    # value 2 on a quarter of the unit torus
    d = make_domain(1, Torus(1.0), 64)
    a = np.zeros(64)
    a[:16] = 2.0
    return GridFunction(d, a)


# --- Lebesgue and weak norms -----------------------------------------------


@pytest.mark.parametrize("p,expected", [(1, 0.5), (2, 1.0), (4, math.sqrt(2)), (math.inf, 2.0)])
def test_step_lp(step, p, expected):
    assert Nm.norm(step, Nm.Lp(p)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("p", [0.5, 1, 2, 4])
def test_step_weak_lp_equals_strong(step, p):
    assert Nm.norm(step, Nm.WeakLp(p)) == pytest.approx(2 * 0.25 ** (1 / p), rel=1e-14)


@given(seed=st.integers(0, 10_000), p=st.floats(0.3, 8.0))
def test_weak_lp_bounded_by_lp(seed, p):
    d = make_domain(1, TruncatedLine(20.0), 128)
    u = sample_family(RandomTrig(6, seed), d)
    assert Nm.norm(u, Nm.WeakLp(p)) <= Nm.norm(u, Nm.Lp(p)) * (1 + 1e-12)


@given(seed=st.integers(0, 10_000), p=st.floats(0.5, 6.0), q=st.floats(0.5, 6.0))
def test_holder(seed, p, q):
    d = make_domain(1, TruncatedLine(20.0), 128)
    u = sample_family(RandomTrig(6, seed), d)
    v = sample_family(RandomTrig(5, seed + 1), d)
    r = 1 / (1 / p + 1 / q)
    lhs = Nm.norm(u * v, Nm.Lp(r))
    assert lhs <= Nm.norm(u, Nm.Lp(p)) * Nm.norm(v, Nm.Lp(q)) * (1 + 1e-12)


def test_norm_spec_errors():
    with pytest.raises(ValueError):
        Nm.Lp(0.0)
    with pytest.raises(ValueError):
        Nm.WeakLp(math.inf)
    with pytest.raises(ValueError):
        Nm.Besov(1.0, 2, 2)
    with pytest.raises(ValueError):
        Nm.Besov(0.5, 0.5, 2)
    with pytest.raises(ValueError):
        Nm.HardyProxy(0.0)
    d = make_domain(1, TruncatedLine(20.0), 64)
    with pytest.raises(TypeError):
        Nm.norm(GridFunction.constant(d), "L2")


# --- weighted norms and weights --------------------------------------------


def test_unit_weight_norm_is_lebesgue():
    d = make_domain(1, TruncatedLine(20.0), 256)
    u = sample_family(Gaussian(1.0), d)
    w = Nm.unit_weight(d)
    assert Nm.norm(u, Nm.WeightedLp(2, w)) == pytest.approx(Nm.norm(u, Nm.Lp(2)), rel=1e-14)
    assert Nm.ap_constant(w, 2.0) == 1.0


def test_weighted_norm_with_exponent():
    d = make_domain(1, TruncatedLine(20.0), 256)
    u = sample_family(Gaussian(1.0), d)
    w = Nm.make_power_weight(0.5, d)
    direct = (d.h * (np.abs(u.samples) ** 3 * d.radius() ** (0.5 * 0.4)).sum()) ** (1 / 3)
    assert Nm.norm(u, Nm.WeightedLp(3, w, beta=0.4)) == pytest.approx(direct, rel=1e-14)
    other = make_domain(1, TruncatedLine(20.0), 128)
    with pytest.raises(GridError):
        Nm.norm(sample_family(Gaussian(1.0), other), Nm.WeightedLp(2, w))


def test_weight_construction_errors():
    d = make_domain(1, TruncatedLine(20.0), 64)
    with pytest.raises(GridError):
        Nm.Weight(GridFunction(d, -np.ones(64)))
    with pytest.raises(GridError):
        Nm.Weight(GridFunction(d, 1j * np.ones(64)))
    with pytest.raises(GridError):
        Nm.make_power_weight(0.5, make_domain(1, Torus(1.0), 64))
    with pytest.raises(ValueError):
        Nm.ap_constant(Nm.unit_weight(d), 1.0)


@pytest.mark.parametrize("a,q,flag", [(0.5, 2, True), (0.9, 2, True), (1.2, 2, False), (-0.5, 2, True),
                                      (-1.0, 2, False), (1.2, 3, True)])
def test_power_weight_admissibility_flag(a, q, flag):
    w = Nm.make_power_weight(a, make_domain(1, TruncatedLine(20.0), 64))
    assert w.admissible(q) is flag
    assert w.label == f"power(a={a:g})"


def test_custom_weight_has_no_flag():
    d = make_domain(1, TruncatedLine(20.0), 64)
    assert Nm.Weight(GridFunction(d, np.ones(64), "flat")).admissible(2) is None


def test_ap_constant_resolution_behaviour():
    # admissible weights converge, inadmissible ones grow without bound
    inside = [Nm.ap_constant(Nm.make_power_weight(0.5, make_domain(1, TruncatedLine(20.0), N)), 2.0)
              for N in (512, 1024, 2048)]
    assert max(inside) / min(inside) <= 1.03
    assert inside[0] == pytest.approx(Nm.ap_constant(
        Nm.make_power_weight(-0.5, make_domain(1, TruncatedLine(20.0), 512)), 2.0), rel=1e-12)
    outside = [Nm.ap_constant(Nm.make_power_weight(1.2, make_domain(1, TruncatedLine(20.0), N)), 2.0)
               for N in (512, 1024, 2048)]
    assert outside[1] / outside[0] > 1.1 and outside[2] / outside[1] > 1.1


@settings(max_examples=25)
@given(a=st.floats(-0.9, 0.9), p=st.floats(1.1, 4.0), dp=st.floats(0.05, 3.0))
def test_ap_constant_non_increasing_in_p(a, p, dp):
    w = Nm.make_power_weight(a, make_domain(1, TruncatedLine(20.0), 256))
    assert Nm.ap_constant(w, p + dp) <= Nm.ap_constant(w, p) * (1 + 1e-12)


def test_ap_constant_two_dimensional():
    d = make_domain(2, TruncatedLine(10.0), 64)
    a = Nm.ap_constant(Nm.make_power_weight(0.8, d), 2.0)
    assert 1.0 < a < 10.0
    assert Nm.ap_constant(Nm.unit_weight(d), 3.0) == pytest.approx(1.0, rel=1e-14)


# --- Besov and Hardy -------------------------------------------------------


@pytest.mark.parametrize("s", [0.2, 0.45, 0.7, 0.9])
@pytest.mark.parametrize("fam", [Gaussian(1.0), WavePacket(4.0, 1.0)])
def test_besov_two_two_matches_sobolev(s, fam):
    u = sample_family(fam, make_domain(1, TruncatedLine(20.0), 1024))
    ratio = Nm.norm(u, Nm.Besov(s, 2, 2)) / Nm.norm(spectral.ds(u, s), Nm.Lp(2))
    assert ratio == pytest.approx(besov_sobolev_constant(1, s), rel=1e-5)


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_besov_two_two_matches_sobolev_2d(s):
    u = sample_family(Gaussian(1.0), make_domain(2, TruncatedLine(8.0), 64))
    ratio = Nm.norm(u, Nm.Besov(s, 2, 2)) / Nm.norm(spectral.ds(u, s), Nm.Lp(2))
    assert ratio == pytest.approx(besov_sobolev_constant(2, s), rel=1e-4)


def test_besov_correction_improves_accuracy():
    u = sample_family(WavePacket(4.0, 1.0), make_domain(1, TruncatedLine(20.0), 512))
    ref = besov_sobolev_constant(1, 0.45) * Nm.norm(spectral.ds(u, 0.45), Nm.Lp(2))
    plain = Nm.besov_seminorm(u, 0.45, 2, 2, correct=False)
    fixed = Nm.besov_seminorm(u, 0.45, 2, 2)
    assert abs(fixed - ref) < abs(plain - ref) / 10


@given(c=st.floats(-5, 5), shift=st.integers(0, 255))
def test_besov_invariances(c, shift):
    d = make_domain(1, TruncatedLine(20.0), 256)
    u = sample_family(Gaussian(1.0), d)
    plus = GridFunction(d, np.roll(u.samples, shift) + c)
    assert Nm.besov_seminorm(plus, 0.45, 3, 1.5) == pytest.approx(Nm.besov_seminorm(u, 0.45, 3, 1.5), rel=1e-10)


def test_besov_sup_in_q():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    b_inf = Nm.norm(u, Nm.Besov(0.5, 2, math.inf))
    b_2 = Nm.norm(u, Nm.Besov(0.5, 2, 2))
    assert 0 < b_inf < b_2


@pytest.mark.parametrize("p", [0.6, 1.0, 2.0])
def test_hardy_proxy_dominates_lebesgue(p):
    d = make_domain(1, TruncatedLine(20.0), 512)
    for fam in default_family():
        u = sample_family(fam, d)
        assert Nm.norm(u, Nm.HardyProxy(p)) >= Nm.norm(u, Nm.Lp(p)) * (1 - 1e-12)


@given(c=st.floats(-4, 4).filter(lambda c: abs(c) > 1e-3), shift=st.integers(0, 255))
def test_hardy_proxy_homogeneous_and_shift_invariant(c, shift):
    d = make_domain(1, TruncatedLine(20.0), 256)
    u = sample_family(WavePacket(4.0, 1.0), d)
    base = Nm.norm(u, Nm.HardyProxy(0.8))
    moved = GridFunction(d, c * np.roll(u.samples, shift))
    assert Nm.norm(moved, Nm.HardyProxy(0.8)) == pytest.approx(abs(c) * base, rel=1e-10)


def test_lebesgue_or_hardy_switch():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    assert Nm.lebesgue_or_hardy(u, 2.0) == Nm.norm(u, Nm.Lp(2.0))
    assert Nm.lebesgue_or_hardy(u, 0.8) == Nm.norm(u, Nm.HardyProxy(0.8))
