import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latsec import catalog
from latsec.algebraic import Biquadratic, embed
from latsec.errors import DomainError, UnsupportedRankError
from latsec.lattice import Lattice, dual, scale
from latsec.theta import (
    DEFAULT_POLICY,
    ThetaProfile,
    TruncationPolicy,
    dual_exponent,
    fast_flatness,
    flatness,
    flatness_dual,
    flatness_primal,
    gaussian_sum,
    gaussian_tail_bound,
    shaping_adjusted_flatness,
    theta,
    theta_profile,
)
from oracles import brute_points, brute_shells, theta_z

BCC = np.array([[1, 1, -1], [1, -1, -1], [1, -1, 1]], dtype=float)
SIGMAS = np.linspace(0.1, 2.0, 10)


def _poisson_gap(L, s):
    p = flatness_primal(L, s)
    d = flatness_dual(L, s)
    return abs(p.value - d.value), p.tail_estimate + d.tail_estimate


# ---------------------------------------------------------------- policy and profile


def test_policy_validation():
    with pytest.raises(DomainError):
        TruncationPolicy(mode="sometimes")
    with pytest.raises(DomainError):
        TruncationPolicy.adaptive(1.5)
    with pytest.raises(DomainError):
        TruncationPolicy.fixed(10.0, max_radius=5.0)


def test_theta_z1_fixed_radius():
    q = 0.3
    val, prof = theta(Lattice([[1.0]]), q, TruncationPolicy.fixed(math.sqrt(4.5)))
    assert val == pytest.approx(1 + 2 * q + 2 * q**4, rel=1e-14)
    assert prof.norms == (0.0, 1.0, 4.0) and prof.counts == (1, 2, 2)


def test_theta_e8_first_shells():
    q = 0.2
    val, prof = theta(catalog.make("E8"), q, TruncationPolicy.fixed(2.0))
    assert prof.counts == (1, 240, 2160)
    assert val == pytest.approx(1 + 240 * q**2 + 2160 * q**4, rel=1e-13)


def test_theta_rejects_bad_q():
    with pytest.raises(DomainError):
        theta(Lattice([[1.0]]), 1.0)


@given(arrays(np.int64, (3, 3), elements=st.integers(-2, 2)).filter(lambda b: abs(np.linalg.det(b)) > 0.5))
def test_theta_rotation_invariant(B):
    L = Lattice(B.astype(float))
    rng = np.random.default_rng(int(np.abs(B).sum()))
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    pol = TruncationPolicy.fixed(3.0)
    a, pa = theta(L, 0.4, pol)
    b, pb = theta(Lattice(Q @ L.basis), 0.4, pol)
    assert pa.counts == pb.counts
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("name", ["E8", "BCC", "A8*", "D4", "E6", "H12"])
def test_profile_invariants(name):
    prof = theta_profile(catalog.make(name), 6.0)
    assert prof.norms[0] == 0.0 and prof.counts[0] == 1
    assert all(b > a for a, b in zip(prof.norms, prof.norms[1:]))
    assert all(c > 0 and c % 2 == 0 for c in prof.counts[1:])


@pytest.mark.parametrize("basis", [BCC, np.array([[2.0, 1.0], [0.0, 1.5]])])
def test_profile_matches_brute_force_shells(basis):
    prof = theta_profile(Lattice(basis), 10.0)
    want = brute_shells(basis, 10.0)
    assert np.allclose(prof.norms, sorted(want), atol=1e-9)
    assert list(prof.counts) == [want[k] for k in sorted(want)]


def test_profile_csv():
    prof = theta_profile(Lattice([[1.0]]), 4.0)
    assert prof.to_csv() == "norm_sq,count\n0,1\n1,2\n4,2\n"


def test_profile_truncate():
    prof = ThetaProfile((0.0, 1.0, 2.0), (1, 4, 4), 2.0)
    assert prof.truncate(1.0).counts == (1, 4)


def test_tail_bound_dominates_actual_tail():
    # Z^2 at a = 0.5: exact tail beyond R from brute force on a wide box
    a, R = 0.5, 3.0
    z = np.array([(i, j) for i in range(-40, 41) for j in range(-40, 41)])
    nrm = (z * z).sum(axis=1)
    actual = np.exp(-a * nrm[nrm > R * R]).sum()
    bound = gaussian_tail_bound(2, 1.0, a, math.sqrt(0.5), R)
    assert actual <= bound
    assert bound < 50 * actual


# ---------------------------------------------------------------- gaussian sums


def test_gaussian_sum_examples():
    Z = Lattice([[1.0]])
    want = (2 * math.pi) ** -0.5 * theta_z(math.exp(-0.5))
    assert gaussian_sum(Z, [0.0], 1.0) == pytest.approx(want, rel=1e-9)
    assert gaussian_sum(Z, [0.5], 0.2) < gaussian_sum(Z, [0.0], 0.2)
    with pytest.raises(DomainError):
        gaussian_sum(Z, [0.0], 0.0)


def test_gaussian_sum_shifted_oracle():
    s, x = 0.7, 0.3
    k = np.arange(-60, 61)
    want = math.fsum(np.exp(-((k + x) ** 2) / (2 * s * s))) / math.sqrt(2 * math.pi * s * s)
    assert gaussian_sum(Lattice([[1.0]]), [x], s) == pytest.approx(want, rel=1e-9)


def test_gaussian_sum_periodic():
    L = Lattice(BCC)
    shift = np.array([0.2, -0.1, 0.4])
    a = gaussian_sum(L, shift, 0.8)
    b = gaussian_sum(L, shift + BCC @ np.array([1, -2, 1]), 0.8)
    assert a == pytest.approx(b, rel=1e-9)


def test_gaussian_sum_zero_shift_identity():
    L = catalog.make("D4")
    s = 0.6
    val, _ = theta(L, math.exp(-1 / (2 * s * s)))
    want = (2 * math.pi * s * s) ** -2 * val
    assert gaussian_sum(L, np.zeros(4), s) == pytest.approx(want, rel=1e-9)


# ---------------------------------------------------------------- flatness


def test_dual_exponent_from_poisson():
    # Z at sigma = 1: primal - 1 equals 2 exp(-2 pi^2) to leading order
    f = flatness_primal(Lattice([[1.0]]), 1.0).value
    assert f == pytest.approx(2 * math.exp(-2 * math.pi**2), rel=1e-6)
    assert dual_exponent(1.0) == pytest.approx(2 * math.pi**2)


def test_z1_primal_equals_dual():
    gap, tol = _poisson_gap(Lattice([[1.0]]), 1.0)
    assert gap <= tol + 1e-15


@pytest.mark.parametrize("name", ["E8", "BCC", "Z3"])
def test_poisson_duality(name):
    L = catalog.make(name)
    for s in SIGMAS:
        gap, tol = _poisson_gap(L, s)
        assert gap <= tol + 1e-13, (name, s)


def test_e8_primal_dual_at_03():
    gap, tol = _poisson_gap(catalog.make("E8"), 0.3)
    assert gap <= tol + 1e-13


@pytest.mark.parametrize("n", [1, 3, 5])
def test_dual_product_identity_zn(n):
    for s in (0.2, 0.5, 1.0):
        want = theta_z(math.exp(-dual_exponent(s))) ** n - 1
        got = flatness_dual(Lattice(np.eye(n)), s).value
        assert abs(got - want) <= 1e-10 * max(1.0, want)


def test_flatness_decreasing_to_zero():
    L = catalog.make("BCC")
    vals = [flatness(L, s).value for s in np.linspace(0.2, 3.0, 15)]
    assert all(b < a for a, b in zip(vals, vals[1:]) if a > 1e-12)
    assert vals[-1] < 1e-10


def test_rank_one_in_r3():
    L = Lattice(np.array([[1.0], [1.0], [1.0]]))
    ref = Lattice([[math.sqrt(3)]])
    for s in (0.3, 1.0, 2.0):
        assert flatness_primal(L, s).value == pytest.approx(flatness_primal(ref, s).value, rel=1e-10)
    with pytest.raises(UnsupportedRankError):
        flatness_dual(L, 1.0)


@given(st.sampled_from([0.5, 3 ** (1 / 8), 2.0, 1.7]), st.floats(0.2, 1.5))
def test_scaling_property(a, s):
    L = Lattice(BCC)
    x = flatness(L, s).value
    y = flatness(scale(L, a), a * s).value
    assert y == pytest.approx(x, rel=1e-8, abs=1e-15)


def test_dispatcher_agrees_with_both_paths_z4():
    Z4 = Lattice(np.eye(4))
    for s in SIGMAS:
        f = flatness(Z4, s)
        for other in (flatness_primal(Z4, s), flatness_dual(Z4, s)):
            assert abs(f.value - other.value) <= f.tail_estimate + other.tail_estimate + 1e-13


def test_e8_flatter_than_z8():
    assert flatness(catalog.make("E8"), 0.25).value < flatness(Lattice(np.eye(8)), 0.25).value


def test_fast_flatness_matches_library():
    rng = np.random.default_rng(3)
    for _ in range(5):
        B = rng.normal(size=(4, 4))
        L = Lattice(B)
        for s in (0.3, 0.7):
            want = flatness(L, s).value
            assert fast_flatness(L.gram, s) == pytest.approx(want, rel=1e-7, abs=1e-12)
    D = np.diag([0.5, 1.0, 2.0])
    assert fast_flatness(D.T @ D, 0.6) == pytest.approx(flatness(Lattice(D), 0.6).value, rel=1e-9)


def test_fast_flatness_respects_point_cap_on_skewed_basis(monkeypatch):
    # Z^4 behind a unimodular change of basis; the shortest basis vector has
    # norm^2 101, so a ball of that radius already holds ~5e4 points
    monkeypatch.setenv("LATSEC_POINT_BUDGET", "20000")
    k = 10
    U = np.eye(4, k=-1) * k + np.eye(4)
    U = U @ (np.eye(4, k=1) * k + np.eye(4))
    want = flatness(Lattice(np.eye(4)), 0.3).value
    assert fast_flatness(U.T @ U, 0.3, max_points=2000) == pytest.approx(want, rel=0.05)


# ---------------------------------------------------------------- shaping-adjusted flatness


def _direct_shaping_sum(L, h, sigma, sigma_s, r2=60.0):
    """Sum over dual points of exp(-2 pi^2 sum t_i^2 / (h_i^2/sigma^2 + 1/sigma_s^2)) minus 1."""
    D = dual(L).basis
    z, _ = brute_points(D, r2)
    t = z @ D.T
    w = 1.0 / (h**2 / sigma**2 + 1 / sigma_s**2)
    return math.fsum(np.exp(-2 * math.pi**2 * (t * t) @ w))


def test_shaping_equal_weights_z4():
    s = 0.4
    got = shaping_adjusted_flatness(Lattice(np.eye(4)), np.ones(4), s, s).value
    want = theta_z(math.exp(-math.pi**2 * s * s)) ** 4 - 1
    assert got == pytest.approx(want, rel=1e-9)


def test_shaping_direct_series_biquadratic():
    L = embed(Biquadratic(2, 3)).lattice
    h = np.array([0.7, 1.3, 0.4, 1.1])
    for s, ss in ((0.5, 0.5), (0.6, 2.0)):
        got = shaping_adjusted_flatness(L, h, s, ss).value
        assert got == pytest.approx(_direct_shaping_sum(L, h, s, ss), rel=1e-8)


def test_shaping_monotone_and_limit():
    L = Lattice(np.eye(4))
    h = np.array([0.5, 1.0, 1.5, 0.8])
    s = 0.5
    vals = [shaping_adjusted_flatness(L, h, s, ss).value for ss in np.geomspace(0.1, 100, 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    lim = flatness(Lattice(np.diag(h)), s).value
    assert shaping_adjusted_flatness(L, h, s, 1e6).value == pytest.approx(lim, rel=1e-6)
    assert min(vals) >= lim


def test_shaping_rejects_bad_h():
    with pytest.raises(DomainError):
        shaping_adjusted_flatness(Lattice(np.eye(2)), [1.0, -1.0], 1.0, 1.0)
    with pytest.raises(DomainError):
        shaping_adjusted_flatness(Lattice(np.eye(2)), [1.0], 1.0, 1.0)


# ---------------------------------------------------------------- appendix identities


@st.composite
def channel_draws(draw):
    m = draw(st.integers(1, 6))
    n = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    h = np.random.default_rng(seed).normal(size=(m, n))
    return h, draw(st.floats(0.2, 3.0)), draw(st.floats(0.2, 3.0))


@given(channel_draws())
def test_shaping_matrix_identity(d):
    h, s, ss = d
    m, n = h.shape
    lhs = np.eye(m) - ss**2 * h @ np.linalg.inv(s**2 * np.eye(n) + ss**2 * h.T @ h) @ h.T
    rhs = s**2 * np.linalg.inv(s**2 * np.eye(m) + ss**2 * h @ h.T)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-9)


@given(channel_draws())
def test_shaping_determinant_relation(d):
    h, s, ss = d
    m, n = h.shape
    a = np.linalg.det(s**2 * np.eye(m) + ss**2 * h @ h.T)
    b = s ** (2 * (m - n)) * np.linalg.det(s**2 * np.eye(n) + ss**2 * h.T @ h)
    assert a == pytest.approx(b, rel=1e-9)


def test_default_policy_is_adaptive():
    assert DEFAULT_POLICY.mode == "adaptive" and DEFAULT_POLICY.rel_tol == 1e-8


def test_dual_flatness_keeps_relative_precision_when_tiny():
    # Theta_Z*(e^{-a}) - 1 = 2e^{-a} + ..., far below the spacing of floats near 1
    for s in (1.5, 2.0, 3.0):
        got = flatness_dual(Lattice([[1.0]]), s).value
        assert got == pytest.approx(2 * math.exp(-2 * math.pi**2 * s * s), rel=1e-12)
    got = flatness_dual(Lattice(np.eye(3)), 2.0).value
    assert got == pytest.approx(6 * math.exp(-8 * math.pi**2), rel=1e-12)
