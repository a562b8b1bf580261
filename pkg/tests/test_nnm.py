import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from chronon.nnm import (
    JetLengthError,
    NnmModel,
    PhasePoint,
    build_phase_point,
    canonical_momentum,
    eom_residual,
    evolve_via_bracket,
    hamilton_equations_residual,
    hamiltonian_phase,
    hamiltonian_value,
    integrate_eom,
    lagrangian_value,
    momenta,
    poisson_bracket,
    spin_canonical,
    spin_rate_check,
    spin_tensor,
    spin_vector,
)

seeds = st.integers(0, 2**32 - 1)


def random_jet(rng, length, scale=1.0):
    return scale * rng.normal(size=(length, 4))


def n4_model(tau0=0.7):
    return NnmModel.caldirola(1.0, tau0, 4)


# -- model construction ------------------------------------------------------

@pytest.mark.parametrize("tau0", [0.3, 1.0, 4.0 / 3.0])
def test_caldirola_coefficients(tau0):
    model = NnmModel.caldirola(2.0, tau0, 8)
    np.testing.assert_allclose(model.k, oracles.caldirola_exact(2.0, tau0, 8), rtol=1e-14)


def test_caldirola_high_order_underflows_quietly():
    model = NnmModel.caldirola(1.0, 1.0, 400)
    assert np.all(np.isfinite(model.k))
    assert model.k[-1] == 0.0


def test_non_alternating_signs_warn():
    with pytest.warns(UserWarning, match="alternate"):
        NnmModel(1.0, (0.5,))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        NnmModel(1.0, (-0.5, 0.1))


def test_jet_length_errors():
    model = n4_model()
    with pytest.raises(JetLengthError, match="needs 10"):
        eom_residual(model, np.zeros((9, 4)))
    with pytest.raises(JetLengthError):
        build_phase_point(model, np.zeros((8, 4)))
    with pytest.raises(ValueError):
        canonical_momentum(model, np.zeros((9, 4)), 5)
    with pytest.raises(ValueError):
        PhasePoint(np.zeros((2, 4)), np.zeros((3, 4)))


# -- observables against the loop oracles ------------------------------------

@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5))
def test_momenta_match_loops(seed, N):
    rng = np.random.default_rng(seed)
    model = NnmModel.caldirola(1.0, 0.9, N)
    jet = random_jet(rng, 2 * N + 2)
    P = momenta(model, jet)
    for l in range(N + 1):
        np.testing.assert_allclose(P[l], oracles.momentum_loops(model.k, jet, l), rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 5))
def test_spin_matches_loops(seed, N):
    rng = np.random.default_rng(seed)
    model = NnmModel.caldirola(1.0, 0.9, N)
    jet = random_jet(rng, 2 * N + 1)
    np.testing.assert_allclose(spin_vector(model, jet), oracles.spin_vector_loops(model.k, jet), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(spin_tensor(model, jet), oracles.spin_tensor_loops(model.k, jet), rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 5))
def test_hamiltonian_matches_loops(seed, N):
    rng = np.random.default_rng(seed)
    model = NnmModel.caldirola(1.0, 0.9, N)
    jet = random_jet(rng, 2 * N + 1)
    assert hamiltonian_value(model, jet) == pytest.approx(oracles.hamiltonian_loops(model.k, jet), rel=1e-12, abs=1e-13)


def test_n4_printed_expressions():
    rng = np.random.default_rng(4)
    model = n4_model()
    jet = random_jet(rng, 10)
    np.testing.assert_allclose(
        canonical_momentum(model, jet, 0), oracles.momentum_n4_printed(model.mass, model.k, jet), rtol=1e-13
    )
    np.testing.assert_allclose(spin_vector(model, jet), oracles.spin_n4_printed(model.k, jet), rtol=1e-12, atol=1e-15)


def test_spin_tensor_spatial_block_is_spin_vector():
    rng = np.random.default_rng(5)
    model = n4_model()
    jet = random_jet(rng, 9)
    S = spin_tensor(model, jet)
    s = spin_vector(model, jet)
    np.testing.assert_allclose(S, -S.T)
    np.testing.assert_allclose([S[2, 3], S[3, 1], S[1, 2]], s, rtol=1e-12, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4))
def test_canonical_spin_equals_spin_vector(seed, N):
    rng = np.random.default_rng(seed)
    model = NnmModel.caldirola(1.0, 0.8, N)
    jet = random_jet(rng, 2 * N + 1)
    point = build_phase_point(model, jet)
    np.testing.assert_allclose(spin_canonical(point), spin_vector(model, jet), rtol=1e-11, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 4))
def test_phase_hamiltonian_equals_jet_hamiltonian(seed, N):
    rng = np.random.default_rng(seed)
    model = NnmModel.caldirola(1.0, 0.8, N)
    jet = random_jet(rng, 2 * N + 1)
    point = build_phase_point(model, jet, x=rng.normal(size=4))
    assert hamiltonian_phase(model, point) == pytest.approx(hamiltonian_value(model, jet), rel=1e-10, abs=1e-12)


def test_newtonian_limit():
    model = NnmModel(3.0)
    jet = np.array([[2.0, 0.5, 0.0, 0.0]])
    assert lagrangian_value(model, jet) == pytest.approx(0.5 * 3.0 * (-4.0 + 0.25))
    np.testing.assert_array_equal(spin_vector(model, jet), np.zeros(3))
    np.testing.assert_allclose(momenta(model, jet)[0], 3.0 * jet[0])


# -- the N = 1 closed-form solution ------------------------------------------

def n1_setup():
    M, k1 = 1.0, -0.25
    A = np.array([0.0, 0.3, -0.2, 0.1])
    B = np.array([0.0, 0.1, 0.4, 0.0])
    v0 = np.array([1.0, 0.1, 0.0, 0.2])
    return NnmModel(M, (k1,)), (M, k1, A, B, v0)


def test_closed_form_solution_solves_eom():
    model, args = n1_setup()
    for tau in np.linspace(0, 3, 7):
        _, jet = oracles.n1_oscillator(*args, tau)
        np.testing.assert_allclose(eom_residual(model, jet), 0.0, atol=1e-13)


def test_integrator_reproduces_closed_form():
    model, args = n1_setup()
    taus = np.linspace(0.0, 4.0, 21)
    _, jet0 = oracles.n1_oscillator(*args, 0.0)
    xs, jets = integrate_eom(model, jet0[:3], taus)
    for tau, x, jet in zip(taus, xs, jets):
        x_ref, jet_ref = oracles.n1_oscillator(*args, tau)
        np.testing.assert_allclose(x, x_ref, atol=1e-10)
        np.testing.assert_allclose(jet, jet_ref, atol=1e-10)


def test_hamiltonian_conserved_along_n4_flow():
    model = NnmModel(1.0, (-0.1, 0.004, -8e-5, 1e-6))
    rng = np.random.default_rng(11)
    jet0 = 0.1 * rng.normal(size=(9, 4))
    _, jets = integrate_eom(model, jet0, np.linspace(0, 2, 11))
    H = [hamiltonian_value(model, j) for j in jets]
    assert max(H) - min(H) < 1e-9 * max(1.0, abs(H[0]))
    for j in jets:
        assert np.max(np.abs(eom_residual(model, j))) < 1e-9


def test_hamilton_equations_converge_second_order():
    model, args = n1_setup()
    res = []
    for h in (4e-3, 2e-3, 1e-3):
        taus = 1.0 + h * np.arange(-2, 3)
        pairs = [oracles.n1_oscillator(*args, t) for t in taus]
        pos = [p[0] for p in pairs]
        jets = [p[1][:3] for p in pairs]
        res.append(hamilton_equations_residual(model, pos, jets, h))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.1)
    assert res[1] / res[2] == pytest.approx(4.0, rel=0.1)
    assert res[2] < 1e-5


def test_spin_rate_identity_on_polynomial_jets():
    model = n4_model()
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=(11, 4)) / np.arange(1, 12)[:, None]
    h = 1e-4
    jets = [oracles.polynomial_jet_family(coeffs, t, 9) for t in (0.5 - h, 0.5, 0.5 + h)]
    scale = np.linalg.norm(spin_vector(model, jets[1])) + 1.0
    assert spin_rate_check(model, jets, h) < 1e-6 * scale


# -- Poisson bracket ----------------------------------------------------------

def coord(kind, l, mu):
    return lambda q: float(getattr(q, kind)[l, mu])


def sample_point(N=2, seed=0):
    rng = np.random.default_rng(seed)
    return PhasePoint(rng.normal(size=(N + 1, 4)), rng.normal(size=(N + 1, 4)))


def test_fundamental_brackets():
    q = sample_point()
    assert poisson_bracket(coord("x", 0, 1), coord("p", 0, 1), q) == pytest.approx(1.0, abs=1e-9)
    assert poisson_bracket(coord("x", 0, 0), coord("p", 0, 0), q) == pytest.approx(-1.0, abs=1e-9)
    assert poisson_bracket(coord("x", 1, 2), coord("p", 1, 2), q) == pytest.approx(1.0, abs=1e-9)
    assert poisson_bracket(coord("x", 0, 1), coord("p", 1, 1), q) == pytest.approx(0.0, abs=1e-9)
    assert poisson_bracket(coord("x", 0, 1), coord("x", 2, 3), q) == pytest.approx(0.0, abs=1e-9)


def test_bracket_antisymmetry_and_leibniz():
    q = sample_point(seed=1)
    f = lambda z: float(z.x[1, 1] * z.p[0, 2] + z.x[0, 3] ** 2)  # noqa: E731
    g = lambda z: float(np.sin(z.p[1, 1]) + z.x[1, 2] * z.p[2, 3])  # noqa: E731
    h = lambda z: float(z.p[0, 2] ** 2 + z.x[2, 3])  # noqa: E731
    fg = lambda z: f(z) * g(z)  # noqa: E731
    assert poisson_bracket(f, g, q) == pytest.approx(-poisson_bracket(g, f, q), abs=1e-8)
    lhs = poisson_bracket(fg, h, q)
    rhs = f(q) * poisson_bracket(g, h, q) + g(q) * poisson_bracket(f, h, q)
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-7)


def test_spin_components_bracket_like_angular_momentum():
    q = sample_point(N=2, seed=7)
    s = [lambda z, i=i: float(spin_canonical(z)[i]) for i in range(3)]
    s_val = spin_canonical(q)
    assert poisson_bracket(s[0], s[1], q) == pytest.approx(s_val[2], rel=1e-6, abs=1e-7)


def test_bracket_flow_reproduces_velocity():
    model, args = n1_setup()
    _, jet = oracles.n1_oscillator(*args, 0.7)
    point = build_phase_point(model, jet[:3])
    x1 = coord("x", 0, 1)
    assert evolve_via_bracket(x1, point, model) == pytest.approx(jet[0, 1], rel=1e-7)
    assert evolve_via_bracket(x1, point, model, printed_order=True) == pytest.approx(-jet[0, 1], rel=1e-7)
    assert evolve_via_bracket(x1, point, model, dGdt=lambda q: 2.0) == pytest.approx(jet[0, 1] + 2.0, rel=1e-7)


def test_hamiltonian_has_vanishing_self_bracket():
    model = n4_model()
    q = build_phase_point(model, random_jet(np.random.default_rng(2), 9, 0.3))
    H = lambda z: hamiltonian_phase(model, z)  # noqa: E731
    assert abs(poisson_bracket(H, H, q)) < 1e-8


def test_spin_rate_requires_three_jets():
    with pytest.raises(ValueError):
        spin_rate_check(n4_model(), np.zeros((2, 9, 4)), 0.1)
    assert math.isfinite(spin_rate_check(n4_model(), np.ones((3, 9, 4)), 0.1))
