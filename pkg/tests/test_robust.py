import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secrecy_sdp import sdp
from secrecy_sdp.channel import UncertaintySpec, load_instance, make_rng, uncertainty_from_ratios
from secrecy_sdp.oracle import sample_ball
from secrecy_sdp.perfect import secrecy_rate, solve_src, solve_srm
from secrecy_sdp.robust import (
    RobustDesign,
    bob_lmi,
    eve_lmi,
    nominal_rate,
    nonneg_rate_probability,
    solve_robust_src,
    solve_robust_srm,
    worst_case_closed_form,
    worst_case_secrecy_rate,
)

from conftest import random_instance, random_psd


def min_eig(M):
    return np.linalg.eigvalsh(M)[0]


def random_spec(seed, alpha_b=0.03, alpha_e=0.1, n_t=4, eve_dims=(2, 2), power=10.0):
    inst = random_instance(seed, n_t=n_t, eve_dims=eve_dims, power=power)
    return uncertainty_from_ratios(inst, alpha_b, alpha_e)


def sampled_rates(W, spec, n, rng):
    """Secrecy rate of ``W`` at ``n`` joint draws from the balls."""
    hs = sample_ball(rng, spec.h_bar, spec.eps_b, n)
    Gs = [sample_ball(rng, G, e, n) for G, e in zip(spec.G_bars, spec.eps_e)]
    out = np.empty(n)
    for i in range(n):
        bob = np.log2(1 + np.real(hs[i].conj() @ W @ hs[i]))
        eve = max(np.sum(np.log2(1 + np.linalg.eigvalsh(G[i].conj().T @ W @ G[i]))) for G in Gs)
        out[i] = bob - eve
    return out


@pytest.fixture(scope="module")
def ball_spec():
    return load_instance("fixtures/bob_ball.json")


# -- LMI blocks ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_bob_lmi_zero_radius(seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    W = random_psd(rng, 3)
    q = np.real(h.conj() @ W @ h)
    # the scalar corner is exactly the nominal margin
    assert bob_lmi(W, 0.0, 0.7, h, 0.0)[-1, -1].real == pytest.approx(1 + q - 0.7)
    # with lambda = 0 the Schur complement of W leaves 1 - theta, so the
    # nominal constraint is only reached as lambda grows
    assert min_eig(bob_lmi(W, 0.0, 0.9, h, 0.0)) >= -1e-12
    assert min_eig(bob_lmi(W, 0.0, 1.1, h, 0.0)) < 0
    assert min_eig(bob_lmi(W, 1e8, 1 + q - 0.1, h, 0.0)) > 0
    for lam in (0.0, 1.0, 1e8):
        assert min_eig(bob_lmi(W, lam, 1 + q + 0.1, h, 0.0)) < 0


def test_bob_lmi_zero_covariance():
    h = np.array([1.0, 0.5j])
    W = np.zeros((2, 2))
    T = bob_lmi(W, 0.3, 1.0, h, 0.5)
    np.testing.assert_allclose(T, np.diag([0.3, 0.3, -0.3 * 0.25]), atol=1e-15)
    assert min_eig(T) < 0
    assert min_eig(bob_lmi(W, 0.0, 1.0, h, 0.5)) == 0.0


@settings(max_examples=15)
@given(seed=st.integers(0, 10**6))
def test_lmis_are_sound_on_samples(seed):
    """If the block is PSD, the guarded inequality holds at sampled channels."""
    rng = np.random.default_rng(seed)
    n_t, n_e, eps = 3, 2, 0.3
    h = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
    G = rng.standard_normal((n_t, n_e)) + 1j * rng.standard_normal((n_t, n_e))
    W = random_psd(rng, n_t, 1)
    lam = 5.0
    # pick theta just inside each block's feasible range by bisection
    lo, hi = -100.0, 100.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if min_eig(bob_lmi(W, lam, mid, h, eps)) >= 0 else (lo, mid)
    theta_b = lo
    hs = sample_ball(rng, h, eps, 200)
    assert np.all(1 + np.real(np.einsum("ni,ij,nj->n", hs.conj(), W, hs)) >= theta_b - 1e-9)
    R = 0.4
    lo, hi = 0.0, 1e4
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if min_eig(eve_lmi(W, lam, mid, G, eps, R)) >= 0 else (mid, hi)
    theta_e = hi
    for Gs in sample_ball(rng, G, eps, 200):
        assert 1 + np.real(np.trace(Gs.conj().T @ W @ Gs)) <= 2**-R * theta_e + 1e-9


# -- robust SRC ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_robust_src_zero_radius_matches_src(seed):
    spec = random_spec(500 + seed, 0.0, 0.0)
    rob = solve_robust_src(spec, 0.5)
    nom = solve_src(spec.nominal(), 0.5)
    assert rob.status == nom.status == sdp.OPTIMAL
    assert rob.power_used == pytest.approx(nom.power_used, rel=1e-4)


@pytest.mark.parametrize("scale", [1.0, 1.5])
def test_robust_src_bob_ball_contains_zero(scale):
    spec = random_spec(7)
    spec = spec.with_radii(scale * np.linalg.norm(spec.h_bar), spec.eps_e)
    d = solve_robust_src(spec, 0.2)
    assert d.status in (sdp.PRIMAL_INFEASIBLE, sdp.DUAL_INFEASIBLE)


def test_robust_src_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        solve_robust_src(random_spec(0), 0.0)


@pytest.mark.parametrize("seed", range(2))
def test_robust_src_holds_on_ball_samples(seed):
    spec = random_spec(600 + seed, n_t=5, eve_dims=(2,), power=100.0)
    d = solve_robust_src(spec, 0.5)
    assert d.status == sdp.OPTIMAL
    assert d.rank_ratio <= 1e-5
    assert d.lambda_b >= -1e-9 and min(d.lambda_e) >= -1e-9
    rng = make_rng(seed, 99)
    assert np.min(sampled_rates(d.W, spec, 1000, rng)) >= 0.5 - 1e-5
    # the S-procedure implication itself, constraint by constraint
    hs = sample_ball(rng, spec.h_bar, spec.eps_b, 1000)
    assert np.all(1 + np.real(np.einsum("ni,ij,nj->n", hs.conj(), d.W, hs)) >= d.theta - 1e-7)
    for G, eps in zip(spec.G_bars, spec.eps_e):
        for Gs in sample_ball(rng, G, eps, 1000):
            assert 1 + np.real(np.trace(Gs.conj().T @ d.W @ Gs)) <= 2**-0.5 * d.theta + 1e-7


# -- robust SRM ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_robust_srm_properties(seed):
    spec = random_spec(700 + seed)
    d = solve_robust_srm(spec)
    assert isinstance(d, RobustDesign)
    assert d.status == sdp.OPTIMAL
    assert d.power_used <= spec.power * (1 + 1e-6)
    if d.rate > 0:
        assert d.rank_ratio <= 1e-5
        assert d.rate == pytest.approx(worst_case_secrecy_rate(d.W, spec), abs=1e-5)
        assert d.rate == pytest.approx(worst_case_closed_form(d.beamformer, spec), abs=1e-5)
        assert d.lambda_b >= -1e-9 and min(d.lambda_e) >= -1e-9
    # never worse than the nominal design under the same evaluator
    nonrobust = solve_srm(spec.nominal())
    assert d.worst_case_rate >= worst_case_secrecy_rate(nonrobust.W, spec) - 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_robust_srm_monotone_in_radius(seed):
    spec1 = random_spec(800 + seed, alpha_e=0.1)
    spec2 = random_spec(800 + seed, alpha_e=0.2)
    spec3 = random_spec(800 + seed, alpha_b=0.06, alpha_e=0.1)
    r1 = solve_robust_srm(spec1).rate
    assert solve_robust_srm(spec2).rate <= r1 + 1e-6
    assert solve_robust_srm(spec3).rate <= r1 + 1e-6


def test_robust_srm_tiny_radius_matches_srm():
    spec = random_spec(900)
    tiny = spec.with_radii(1e-8, [1e-8] * spec.K)
    assert solve_robust_srm(tiny).rate == pytest.approx(solve_srm(spec.nominal()).rate, abs=1e-3)


def test_robust_srm_zero_radius_matches_srm():
    spec = random_spec(901, 0.0, 0.0)
    assert solve_robust_srm(spec).rate == pytest.approx(solve_srm(spec.nominal()).rate, abs=1e-5)


def test_robust_srm_trivial_case():
    # Eve sits on Bob's direction and is stronger
    spec = UncertaintySpec([1.0, 0.0], [[[2.0], [0.0]]], 0.05, [0.05], 1.0)
    d = solve_robust_srm(spec)
    assert d.status == sdp.OPTIMAL and d.rate == 0.0 and not np.any(d.W)


# -- worst-case evaluator --------------------------------------------------------


def test_psi_fixture(ball_spec):
    W = np.diag([1.0, 0.0])
    assert worst_case_secrecy_rate(W, ball_spec) == pytest.approx(np.log2(1.25), abs=1e-7)
    assert worst_case_closed_form(np.array([1.0, 0.0]), ball_spec) == pytest.approx(np.log2(1.25), abs=1e-15)


def test_psi_zero_covariance(ball_spec):
    assert worst_case_secrecy_rate(np.zeros((2, 2)), ball_spec) == 0.0
    assert worst_case_closed_form(None, ball_spec) == 0.0


def test_psi_rejects_higher_rank(ball_spec):
    with pytest.raises(ValueError, match="rank-one"):
        worst_case_secrecy_rate(np.eye(2), ball_spec)


@settings(max_examples=10)
@given(seed=st.integers(0, 10**6))
def test_psi_zero_radius_is_nominal(seed):
    spec = random_spec(seed, 0.0, 0.0, n_t=3, eve_dims=(1, 2))
    w = make_rng(seed, 1).standard_normal(3) + 0j
    W = np.outer(w, w.conj())
    assert worst_case_secrecy_rate(W, spec) == pytest.approx(secrecy_rate(W, spec.nominal()), abs=1e-8)


@settings(max_examples=10)
@given(seed=st.integers(0, 10**6), ab=st.floats(0.0, 0.3), ae=st.floats(0.0, 0.3))
def test_psi_closed_form_and_nominal_bound(seed, ab, ae):
    spec = random_spec(seed, ab, ae, n_t=3, eve_dims=(2, 1))
    rng = make_rng(seed, 2)
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    W = np.outer(w, w.conj())
    psi = worst_case_secrecy_rate(W, spec)
    assert psi == pytest.approx(worst_case_closed_form(w, spec), abs=1e-5)
    assert psi <= secrecy_rate(W, spec.nominal()) + 1e-8


def test_nominal_rate_helper():
    spec = random_spec(3)
    d = solve_robust_srm(spec)
    assert nominal_rate(d, spec) == pytest.approx(secrecy_rate(d.W, spec.nominal()))


# -- non-negativity probability --------------------------------------------------


def test_nonneg_probability_zero_designs():
    specs = [random_spec(s) for s in range(3)]
    assert nonneg_rate_probability([(np.zeros((4, 4)), s) for s in specs]) == 1.0


def test_nonneg_probability_robust_designs():
    specs = [random_spec(1000 + s, alpha_e=0.25) for s in range(3)]
    pairs = [(solve_robust_srm(s).W, s) for s in specs]
    assert nonneg_rate_probability(pairs) == 1.0


def test_nonneg_probability_empty():
    with pytest.raises(ValueError):
        nonneg_rate_probability([])
