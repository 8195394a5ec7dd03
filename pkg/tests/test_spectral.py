import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sp_integrate
from scipy import special

from fraccomm import singular, spectral
from fraccomm.grid import (
    Gaussian,
    GridError,
    GridFunction,
    StepSmooth,
    Torus,
    TruncatedLine,
    WavePacket,
    make_domain,
    sample_family,
)

# D^s of exp(-x^2/2) on R, evaluated with mpmath at 50 digits and frozen
DS07_GAUSSIAN = {
    0.0: 0.7999801906961459,
    1.0: 0.29475851723172365,
    2.0: -0.15369447750386906,
    5.0: -0.046665246941208071,
}


def ds_gaussian_closed(x, s):
    """D^s exp(-x^2/2) on the real line via the confluent hypergeometric form."""
    pref = math.sqrt(2 / math.pi) * 2 ** ((s - 1) / 2) * math.gamma((s + 1) / 2)
    return pref * special.hyp1f1((s + 1) / 2, 0.5, -np.asarray(x) ** 2 / 2)


def ds_gaussian_fourier(x, s):
    """Independent Fourier-inversion quadrature of the same quantity."""
    f = lambda xi: xi**s * math.exp(-xi * xi / 2)
    if x == 0:
        val = sp_integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    else:
        val = sp_integrate.quad(f, 0, 60, weight="cos", wvar=x, epsabs=1e-14, limit=400)[0]
    return math.sqrt(2 / math.pi) * val


def periodized_poisson(t, y, L):
    a = 2 * np.pi / L
    return (1 / L) * np.sinh(a * t) / (np.cosh(a * t) - np.cos(a * y))


# --- oracles ---------------------------------------------------------------


def test_gaussian_oracles_agree_with_frozen_values():
    for x, ref in DS07_GAUSSIAN.items():
        assert ds_gaussian_closed(x, 0.7) == pytest.approx(ref, rel=1e-12)
        assert ds_gaussian_fourier(x, 0.7) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_free_space_ds_matches_fourier_oracle():
    dom = make_domain(1, TruncatedLine(20.0), 1024)
    u = sample_family(Gaussian(1.0), dom)
    got = singular.free_space_ds(u, 0.7).samples
    exact = ds_gaussian_closed(dom.axis, 0.7)
    assert np.abs(got - exact).max() / np.abs(exact).max() <= 1e-6
    nodes = range(0, 1024, 97)
    quad = np.array([ds_gaussian_fourier(dom.axis[i], 0.7) for i in nodes])
    assert np.abs(got[list(nodes)] - quad).max() / np.abs(exact).max() <= 1e-6


def test_free_space_ds_two_dimensional():
    s = 0.7
    dom = make_domain(2, TruncatedLine(8.0), 64)
    u = sample_family(Gaussian(1.0), dom)
    r = dom.radius()
    exact = 2 ** (s / 2) * math.gamma(1 + s / 2) * special.hyp1f1(1 + s / 2, 1, -(r**2) / 2)
    got = singular.free_space_ds(u, s).samples
    assert np.abs(got - exact).max() / np.abs(exact).max() <= 1e-6


def test_periodic_ds_image_error_decays_with_box():
    # periodic images of D^s u fall off like |kL|^{-1-s}
    s = 0.7
    errs = []
    for R in (20.0, 40.0):
        dom = make_domain(1, TruncatedLine(R), 2048)
        u = sample_family(Gaussian(1.0), dom)
        exact = ds_gaussian_closed(dom.axis, s)
        errs.append(np.abs(spectral.ds(u, s).samples - exact).max() / np.abs(exact).max())
    assert errs[0] / errs[1] == pytest.approx(2 ** (1 + s), rel=0.1)


def test_free_space_ds_rejects_torus_and_bad_order():
    u = GridFunction(make_domain(1, Torus(2 * np.pi), 32), np.ones(32))
    with pytest.raises(GridError):
        singular.free_space_ds(u, 0.5)
    v = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(10.0), 64))
    with pytest.raises(ValueError):
        singular.free_space_ds(v, 2.0)


def test_periodized_poisson_kernel_matches_image_sum():
    L, t = 40.0, 1.0
    y = np.linspace(-L / 2, L / 2, 9)
    K = 2000
    images = sum(spectral.poisson_kernel(1, t, y + k * L) for k in range(-K, K + 1))
    images += 2 * t / (math.pi * L * L * (K + 0.5))
    assert np.abs(images - periodized_poisson(t, y, L)).max() < 1e-12


@pytest.mark.parametrize("fam", [Gaussian(1.0), StepSmooth(1.0, 2.0), WavePacket(4.0, 1.0)])
def test_poisson_multiplier_matches_direct_convolution(fam):
    dom = make_domain(1, TruncatedLine(20.0), 512)
    u = sample_family(fam, dom)
    x = dom.axis
    direct = dom.h * periodized_poisson(1.0, x[:, None] - x[None, :], dom.extent) @ u.samples
    spec = spectral.apply_multiplier(spectral.Poisson(1.0), u).samples
    assert np.abs(direct - spec).max() / np.abs(spec).max() <= 1e-4


# --- multiplier calculus ---------------------------------------------------


@given(k=st.integers(-15, 15), s=st.floats(0.05, 1.95))
def test_fourier_modes_are_eigenfunctions(k, s):
    dom = make_domain(1, Torus(2 * np.pi), 32)
    e = np.exp(1j * k * dom.axis)
    got = spectral.ds(GridFunction(dom, e), s).samples
    lam = abs(k) ** s if k else 0.0
    assert np.abs(got - lam * e).max() <= 1e-12 * max(1.0, lam)


@given(s=st.floats(0.05, 1.95))
def test_dilation_covariance(s):
    # the same samples on half the box are f(2x); D^s picks up 2^s
    big = sample_family(Gaussian(2.0), make_domain(1, TruncatedLine(20.0), 256))
    small = GridFunction(make_domain(1, TruncatedLine(10.0), 256), big.samples)
    a = spectral.ds(big, s).samples
    b = spectral.ds(small, s).samples
    assert np.abs(b - 2**s * a).max() <= 1e-12 * np.abs(b).max()


@given(t1=st.floats(0.01, 5.0), t2=st.floats(0.01, 5.0))
def test_poisson_semigroup(t1, t2):
    u = sample_family(WavePacket(4.0, 1.0), make_domain(1, TruncatedLine(20.0), 256))
    P = spectral.Poisson
    lhs = spectral.apply_multiplier(P(t1), spectral.apply_multiplier(P(t2), u)).samples
    rhs = spectral.apply_multiplier(P(t1 + t2), u).samples
    assert np.abs(lhs - rhs).max() <= 1e-12


@given(s=st.floats(0.0, 1.5), t=st.floats(0.0, 1.5))
def test_composition_of_orders(s, t):
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    scale = np.abs(spectral.ds(u, s + t).samples).max()
    assert spectral.compose_check(s, t, u) <= 1e-12 * max(scale, 1.0)


@given(s=st.floats(0.05, 1.95))
def test_real_input_gives_real_output(s):
    for fam in (Gaussian(1.0), WavePacket(4.0, 1.0)):
        u = sample_family(fam, make_domain(1, TruncatedLine(20.0), 256))
        assert spectral.ds(u, s).is_real()
        assert spectral.apply_multiplier(spectral.Js(-s), u).is_real()


def test_compose_check_rejects_negative_orders():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 64))
    with pytest.raises(ValueError):
        spectral.compose_check(-0.1, 0.5, u)


def test_negative_bessel_order_inverts_positive():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    back = spectral.apply_multiplier(spectral.Js(-0.8), spectral.apply_multiplier(spectral.Js(0.8), u))
    assert np.abs(back.samples - u.samples).max() <= 1e-12


def test_operator_constructor_errors():
    with pytest.raises(ValueError):
        spectral.Ds(-0.5)
    with pytest.raises(ValueError):
        spectral.Poisson(0.0)
    with pytest.raises(ValueError):
        spectral.MultiplierOp("riesz", 1.0)
    dom = make_domain(1, TruncatedLine(10.0), 64)
    with pytest.raises(ValueError):
        spectral.symbol(spectral.DirectionalDs(1, 0.5), dom)


def test_directional_multiplier_acts_on_one_axis():
    dom = make_domain(2, Torus(2 * np.pi), 32)
    x, y = dom.mesh()
    u = GridFunction(dom, np.cos(3 * x) * np.cos(2 * y))
    got = spectral.apply_multiplier(spectral.DirectionalDs(0, 0.6), u).samples
    assert np.abs(got - 3**0.6 * u.samples).max() <= 1e-12
    got = spectral.apply_multiplier(spectral.DirectionalDs(1, 0.6), u).samples
    assert np.abs(got - 2**0.6 * u.samples).max() <= 1e-12


# --- commutator ------------------------------------------------------------


@given(s=st.floats(0.05, 1.95))
def test_commutator_of_plane_waves(s):
    dom = make_domain(1, Torus(2 * np.pi), 32)
    e = GridFunction(dom, np.exp(1j * dom.axis))
    got = spectral.commutator_spectral(e, e, s).samples
    expect = (2**s - 2) * np.exp(2j * dom.axis)
    assert np.abs(got - expect).max() <= 1e-12


def test_commutator_with_constant_vanishes():
    dom = make_domain(1, TruncatedLine(20.0), 256)
    one = GridFunction.constant(dom)
    v = sample_family(WavePacket(4.0, 1.0), dom)
    assert np.abs(spectral.commutator_spectral(one, v, 0.7).samples).max() <= 1e-12


@pytest.mark.parametrize("fam", [Gaussian(1.0), WavePacket(4.0, 1.0)])
def test_commutator_equals_scaled_bilinear_form(fam):
    dom = make_domain(1, TruncatedLine(20.0), 1024)
    u = sample_family(fam, dom)
    v = sample_family(Gaussian(2.0), dom)
    comm = spectral.commutator_spectral(u, v, 0.9).samples
    T = singular.bilinear_T(u, v, 0.9).samples
    c = singular.constant_c(1, 0.9)
    assert np.abs(comm - c * T).max() / np.abs(comm).max() <= 1e-2


def test_commutator_errors():
    a = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 64))
    b = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 128))
    with pytest.raises(GridError):
        spectral.commutator_spectral(a, b, 0.5)
    with pytest.raises(ValueError):
        spectral.commutator_spectral(a, a, 2.0)


# --- Poisson extension -----------------------------------------------------


def test_poisson_extension_levels_match_multiplier():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    field = spectral.poisson_extend(u)
    for i in (0, 20, 63):
        ref = spectral.apply_multiplier(spectral.Poisson(field.t_levels[i]), u).samples
        assert np.abs(field.U[i] - ref).max() <= 1e-13
    dt = spectral.apply_multiplier(spectral.PoissonGrad(field.t_levels[5], "t"), u).samples
    assert np.abs(field.grad[5, 1] - dt).max() <= 1e-13


def test_poisson_extension_plane_wave():
    dom = make_domain(1, Torus(2 * np.pi), 32)
    u = GridFunction(dom, np.exp(3j * dom.axis))
    field = spectral.poisson_extend(u)
    for i in (0, 30, 63):
        t = field.t_levels[i]
        assert np.abs(field.U[i] - np.exp(-3 * t) * u.samples).max() <= 1e-13
        assert np.abs(field.grad[i, 0] - 3j * np.exp(-3 * t) * u.samples).max() <= 1e-13


def test_harmonicity_residual_decreases_with_level_count():
    u = sample_family(Gaussian(1.0), make_domain(1, TruncatedLine(20.0), 256))
    res = [spectral.harmonicity_residual(spectral.poisson_extend(u, spectral.default_t_levels(u.domain, m)))
           for m in (64, 128, 256)]
    assert res[0] > res[1] > res[2]


def test_t_level_validation():
    dom = make_domain(1, TruncatedLine(20.0), 256)
    good = spectral.default_t_levels(dom)
    assert np.array_equal(spectral.validate_t_levels(dom, good), good)
    with pytest.raises(ValueError):
        spectral.validate_t_levels(dom, good[:10])
    with pytest.raises(ValueError):
        spectral.validate_t_levels(dom, good[::-1])
    with pytest.raises(ValueError):
        spectral.validate_t_levels(dom, good[1:])
    with pytest.raises(ValueError):
        spectral.validate_t_levels(dom, np.geomspace(dom.h / 2, 10.0, 64))


def test_two_dimensional_extension_energy_shape():
    dom = make_domain(2, TruncatedLine(10.0), 32)
    u = sample_family(Gaussian(1.0), dom)
    field = spectral.poisson_extend(u)
    assert field.U.shape == (64, 32, 32)
    assert field.grad.shape == (64, 3, 32, 32)
    assert field.energy().shape == (64, 32, 32)
    assert np.all(field.energy() >= 0)
