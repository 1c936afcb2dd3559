import numpy as np
import pytest

from latsec import catalog
from latsec.errors import DomainError
from latsec.lattice import Lattice, minimal_norm
from latsec.theta import TruncationPolicy, theta, theta_profile

SMALL = [
    ("Z5", {}),
    ("L", {}),
    ("E8", {}),
    ("E6", {}),
    ("D4", {}),
    ("A3", {}),
    ("A8*", {}),
    ("A1*", {}),
    ("BCC", {}),
    ("H4", {}),
    ("H12", {}),
    ("H20", {}),
    ("H24", {}),
    ("H28", {}),
]


@pytest.mark.parametrize("name,params", SMALL)
def test_entry_invariants(name, params):
    L = catalog.make(name, **params)
    e = catalog.entry(name, **params)
    lam, vecs = minimal_norm(L)
    assert L.volume == pytest.approx(e.expected_volume, rel=1e-9)
    assert lam == pytest.approx(e.expected_min_norm, rel=1e-9)
    assert len(vecs) == e.expected_kissing


@pytest.mark.parametrize("name", ["E8^3", "E6^4"])
def test_product_entries(name):
    L = catalog.make(name)
    e = catalog.entry(name)
    prof = theta_profile(L, e.expected_min_norm + 0.5)
    assert L.volume == pytest.approx(e.expected_volume, rel=1e-9)
    assert prof.min_norm == pytest.approx(e.expected_min_norm, rel=1e-9)
    assert prof.kissing == e.expected_kissing


def test_e8_certified():
    L = catalog.make("E8")
    lam, vecs = minimal_norm(L)
    assert L.volume == pytest.approx(1.0, rel=1e-12) and lam == pytest.approx(2.0) and len(vecs) == 240


def test_l_is_2z_halfz_z6():
    L = catalog.make("L")
    assert np.allclose(np.diag(L.basis), [2, 0.5, 1, 1, 1, 1, 1, 1])
    assert L.volume == pytest.approx(1.0)


def test_unit_a8_star_min_norm():
    lam, _ = minimal_norm(catalog.make("A8*", unit=True))
    assert lam == pytest.approx(8 / 9 * 3 ** 0.25, rel=1e-9)


def test_unit_e6_power_min_norm():
    L = catalog.make("E6^4", unit=True)
    assert theta_profile(L, 2.0).min_norm == pytest.approx(2 * 3 ** (-1 / 6), rel=1e-9)


def test_fig1_min_norm_ordering():
    lams = {n: minimal_norm(catalog.make(n, unit=True))[0] for n in ("E8", "A8*", "Z8", "L")}
    assert lams["E8"] > lams["A8*"] > lams["Z8"] > lams["L"]


def test_product_theta_multiplies():
    a = catalog.make("D4")
    b = catalog.make("BCC")
    ab = catalog.product(a, b)
    q = 0.3
    # ball truncations of a product differ from products of balls, so sum
    # every series to float precision
    pol = TruncationPolicy.adaptive(1e-14)
    assert theta(ab, q, pol)[0] == pytest.approx(theta(a, q, pol)[0] * theta(b, q, pol)[0], rel=1e-12)
    assert catalog.product(Lattice([[1.0]]), Lattice([[1.0]])) == Lattice(np.eye(2))


def test_hadamard_matrices():
    for n in (1, 2, 4, 8, 12, 20, 24, 28, 36):
        H = catalog.hadamard_matrix(n)
        assert H.shape == (n, n) and set(np.unique(H)) <= {-1, 1}
        assert np.array_equal(H @ H.T, n * np.eye(n, dtype=int))


@pytest.mark.parametrize("n", [3, 6, 10])
def test_hadamard_rejects_invalid_orders(n):
    with pytest.raises(DomainError):
        catalog.make(f"H{n}")


def test_unknown_name():
    with pytest.raises(DomainError):
        catalog.make("K12")


def test_aliases():
    assert catalog.parse_name("A8star") == ("An_star", {"n": 8})
    assert catalog.parse_name("E8x3") == ("E8^3", {})
    assert catalog.parse_name("Z24") == ("Zn", {"n": 24})
    assert catalog.parse_name("Hadamard12") == ("Hadamard", {"n": 12})


def test_golay_weights():
    assert catalog.golay_weight_distribution() == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}


def test_leech_shell_counts_dp():
    prof = catalog.leech_shell_counts(8.0)
    assert prof.norms == (0.0, 4.0, 6.0, 8.0)
    assert prof.counts == (1, 196560, 16773120, 398034000)


def test_leech_basis_invariants():
    L = catalog.make("Leech")
    assert L.volume == pytest.approx(1.0, rel=1e-12)
    g = L.gram
    # even unimodular: integral Gram with even diagonal
    assert np.allclose(g, np.round(g), atol=1e-9)
    assert np.all(np.round(np.diag(g)).astype(int) % 2 == 0)


def test_leech_source_is_recognized():
    from latsec.theta import source_for

    src = source_for(catalog.make("Leech"))
    assert isinstance(src, catalog.LeechSource)
    assert isinstance(source_for(catalog.make("Leech", unit=True)), catalog.LeechSource)
