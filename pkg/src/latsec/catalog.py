"""Named lattices used by the experiments, with certified invariants."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import product as iproduct

import numpy as np

from .errors import DomainError
from .lattice import Lattice, dual, unit_volume
from .theta import ThetaProfile, register_source


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict = field(default_factory=dict)
    expected_min_norm: float = 0.0
    expected_volume: float = 0.0
    expected_kissing: int = 0


@lru_cache(maxsize=1)
def _data():
    with resources.files("latsec").joinpath("data/lattices.json").open() as fh:
        return json.load(fh)


def _from_gram(gram) -> Lattice:
    g = np.asarray(gram, dtype=float)
    return Lattice(np.linalg.cholesky(g).T)


def a_n_gram(n: int) -> np.ndarray:
    """Cartan matrix of A_n."""
    return 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


# ---------------------------------------------------------------- Hadamard


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(math.isqrt(p)) + 1))


def _jacobsthal(q: int) -> np.ndarray:
    squares = {(x * x) % q for x in range(1, q)}
    chi = np.array([0] + [1 if x in squares else -1 for x in range(1, q)])
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    return chi[idx]


def hadamard_matrix(n: int) -> np.ndarray:
    """A Hadamard matrix of order n, or DomainError when none is built.

    Sylvester doubling for powers of two, Paley I (n - 1 prime, 3 mod 4),
    Paley II (n/2 - 1 prime, 1 mod 4), and doubling of a smaller order.
    """
    if n < 1 or (n > 2 and n % 4):
        raise DomainError(f"Hadamard matrices exist only for n = 1, 2 or a multiple of 4; got {n}")
    if n == 1:
        return np.ones((1, 1), dtype=int)
    if n & (n - 1) == 0:
        h = np.ones((1, 1), dtype=int)
        while h.shape[0] < n:
            h = np.block([[h, h], [h, -h]])
        return h
    q = n - 1
    if _is_prime(q) and q % 4 == 3:
        Q = _jacobsthal(q)
        S = np.zeros((n, n), dtype=int)
        S[0, 1:] = 1
        S[1:, 0] = -1
        S[1:, 1:] = Q
        return S + np.eye(n, dtype=int)
    q = n // 2 - 1
    if _is_prime(q) and q % 4 == 1:
        Q = _jacobsthal(q)
        C = np.zeros((q + 1, q + 1), dtype=int)
        C[0, 1:] = 1
        C[1:, 0] = 1
        C[1:, 1:] = Q
        a = np.array([[1, -1], [-1, -1]])
        b = np.array([[1, 1], [1, -1]])
        H = np.zeros((n, n), dtype=int)
        for i in range(q + 1):
            for j in range(q + 1):
                H[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = a if i == j else (b if C[i, j] > 0 else -b)
        return H
    if n % 8 == 0:
        h = hadamard_matrix(n // 2)
        return np.block([[h, h], [h, -h]])
    raise DomainError(f"no Hadamard construction implemented for n = {n}")


# ---------------------------------------------------------------- Leech theta


def golay_weight_distribution() -> dict:
    A = np.array(_data()["golay_a"], dtype=int)
    G = np.hstack([np.eye(12, dtype=int), A])
    words = np.array(list(iproduct((0, 1), repeat=12))) @ G % 2
    w, c = np.unique(words.sum(axis=1), return_counts=True)
    return {int(a): int(b) for a, b in zip(w, c)}


def _coord_poly(residue: int, nmax: int):
    """(x^2, x mod 8) for integers x = residue mod 4 with x^2 <= nmax."""
    r = int(math.isqrt(nmax))
    return [(x * x, x % 8) for x in range(-r, r + 1) if x % 4 == residue]


def _mul(arr, terms, nmax):
    out = np.zeros_like(arr)
    for sq, res in terms:
        if sq > nmax:
            continue
        out[sq:, :] += np.roll(arr[: nmax + 1 - sq, :], res, axis=1)
    return out


def leech_shell_counts(radius_sq: float) -> ThetaProfile:
    """Exact theta profile of the unit-volume Leech lattice.

    Counts integer vectors of sqrt(8) * Leech by squared norm and coordinate
    sum mod 8, one Golay weight class at a time.
    """
    nmax = int(math.floor(8 * radius_sq + 1e-9))
    weights = golay_weight_distribution()
    total = np.zeros(nmax + 1, dtype=object)
    for m_par, (on_res, off_res) in ((0, (2, 0)), (1, (3, 1))):
        on = _coord_poly(on_res, nmax)
        off = _coord_poly(off_res, nmax)
        for w, mult in weights.items():
            arr = np.zeros((nmax + 1, 8), dtype=object)
            arr[0, 0] = 1
            for i in range(24):
                arr = _mul(arr, on if i < w else off, nmax)
            total += mult * arr[:, (4 * m_par) % 8]
    norms, counts = [], []
    for n8, c in enumerate(total):
        if c:
            norms.append(n8 / 8.0)
            counts.append(int(c))
    return ThetaProfile(tuple(norms), tuple(counts), float(radius_sq))


class LeechSource:
    """Theta source for a * Leech (unit-volume Leech scaled by a)."""

    rank = 24

    def __init__(self, a: float = 1.0):
        self.a = float(a)
        self.volume = self.a**24
        self.min_norm = 4.0 * self.a**2
        self.covering_sq = 2.0 * self.a**2
        self.blocks = None

    def dual(self):
        return LeechSource(1.0 / self.a)

    def scaled(self, b):
        return LeechSource(self.a * b)

    def profile(self, radius_sq: float) -> ThetaProfile:
        base = _leech_profile_cached(radius_sq / self.a**2)
        s = self.a**2
        return ThetaProfile(tuple(n * s for n in base.norms), base.counts, radius_sq)


@lru_cache(maxsize=8)
def _leech_profile_cached(radius_sq):
    return leech_shell_counts(radius_sq)


@lru_cache(maxsize=1)
def _leech_unit_gram():
    return make("Leech", unit=True).gram


@register_source
def _recognize_leech(L: Lattice):
    if L.rank != 24:
        return None
    g0 = _leech_unit_gram()
    a2 = L.gram[0, 0] / g0[0, 0]
    if np.allclose(L.gram, a2 * g0, rtol=1e-10, atol=1e-12 * a2):
        return LeechSource(math.sqrt(a2))
    return None


# ---------------------------------------------------------------- constructors


def product(L1: Lattice, L2: Lattice) -> Lattice:
    """Orthogonal direct sum."""
    n1, m1 = L1.basis.shape
    n2, m2 = L2.basis.shape
    B = np.zeros((n1 + n2, m1 + m2))
    B[:n1, :m1] = L1.basis
    B[n1:, m1:] = L2.basis
    label = f"{L1.label}+{L2.label}" if L1.label and L2.label else ""
    return Lattice(B, label=label)


def power(L: Lattice, k: int) -> Lattice:
    out = L
    for _ in range(k - 1):
        out = product(out, L)
    return Lattice(out.basis, label=f"{L.label}^{k}" if L.label else "")


def _entry(name, **params) -> tuple[Lattice, CatalogEntry]:
    data = _data()
    if name == "Zn":
        n = int(params.get("n", 1))
        return Lattice(np.eye(n)), CatalogEntry(name, params, 1.0, 1.0, 2 * n)
    if name == "L":
        n = int(params.get("n", 8))
        if n < 2:
            raise DomainError("L needs n >= 2")
        d = np.ones(n)
        d[0], d[1] = 2.0, 0.5
        return Lattice(np.diag(d)), CatalogEntry(name, params, 0.25, 1.0, 2)
    if name == "E8":
        B = np.array(data["e8_basis_times_2"], dtype=float) / 2
        return Lattice(B), CatalogEntry(name, params, 2.0, 1.0, 240)
    if name == "E6":
        return _from_gram(data["e6_gram"]), CatalogEntry(name, params, 2.0, math.sqrt(3), 72)
    if name == "D4":
        return _from_gram(data["d4_gram"]), CatalogEntry(name, params, 2.0, 2.0, 24)
    if name == "An":
        n = int(params.get("n", 2))
        return _from_gram(a_n_gram(n)), CatalogEntry(name, params, 2.0, math.sqrt(n + 1), n * (n + 1))
    if name == "An_star":
        n = int(params.get("n", 8))
        if n < 1:
            raise DomainError("A_n* needs n >= 1")
        L = dual(_from_gram(a_n_gram(n)))
        kiss = 2 if n == 1 else 2 * (n + 1)
        return L, CatalogEntry(name, params, n / (n + 1), 1 / math.sqrt(n + 1), kiss)
    if name == "BCC":
        B = np.array([[1, 1, -1], [1, -1, -1], [1, -1, 1]], dtype=float)
        return Lattice(B), CatalogEntry(name, params, 3.0, 4.0, 8)
    if name == "Hadamard":
        n = int(params.get("n", 4))
        H = hadamard_matrix(n) / math.sqrt(n)
        return Lattice(H), CatalogEntry(name, params, 1.0, 1.0, 2 * n)
    if name == "Leech":
        B = np.array(data["leech_basis_times_sqrt8"], dtype=float) / math.sqrt(8)
        return Lattice(B), CatalogEntry(name, params, 4.0, 1.0, 196560)
    if name == "E8^3":
        L, _ = _entry("E8")
        return power(L, 3), CatalogEntry(name, params, 2.0, 1.0, 720)
    if name == "E6^4":
        L, _ = _entry("E6")
        return power(L, 4), CatalogEntry(name, params, 2.0, 9.0, 288)
    raise DomainError(f"unknown catalog lattice {name!r}")


_ALIASES = [
    (re.compile(r"^Z(\d+)$"), lambda m: ("Zn", {"n": int(m.group(1))})),
    (re.compile(r"^Zn$"), lambda m: ("Zn", {})),
    (re.compile(r"^A(\d+)(?:\*|star|_star)$"), lambda m: ("An_star", {"n": int(m.group(1))})),
    (re.compile(r"^A(\d+)$"), lambda m: ("An", {"n": int(m.group(1))})),
    (re.compile(r"^H(?:adamard)?(\d+)$"), lambda m: ("Hadamard", {"n": int(m.group(1))})),
    (re.compile(r"^(E8|E6)(?:\^|x)(\d)$"), lambda m: (f"{m.group(1)}^{m.group(2)}", {})),
    (re.compile(r"^L(\d+)$"), lambda m: ("L", {"n": int(m.group(1))})),
]


def parse_name(name: str) -> tuple[str, dict]:
    """Resolve short names such as Z8, A8*, E8^3, Hadamard12."""
    for pat, fn in _ALIASES:
        m = pat.match(name)
        if m:
            return fn(m)
    return name, {}


def entry(name: str, **params) -> CatalogEntry:
    base, extra = parse_name(name)
    return _entry(base, **{**extra, **params})[1]


def make(name: str, unit: bool = False, **params) -> Lattice:
    """Catalog lattice; unit=True rescales to volume 1."""
    base, extra = parse_name(name)
    L, _ = _entry(base, **{**extra, **params})
    if unit:
        L = unit_volume(L)
    return Lattice(L.basis, label=name)


NAMES = ("Zn", "L", "E6", "E8", "An", "An_star", "D4", "BCC", "Hadamard", "Leech", "E8^3", "E6^4")
