"""Eavesdropper correct-decoding and information-leakage bounds.

Fading sums use gamma = sigma_h / sigma. Fast fading draws one Rayleigh gain
per coordinate; block fading with coherence T shares a gain across the
strided group (i, i+m, ..., i+(T-1)m), m = n / T.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
from scipy.special import gammaln

from .errors import (
    DomainError,
    InvalidSublatticeError,
    NotFullDiversityError,
    ShapeError,
    UnsupportedRankError,
)
from .lattice import Lattice, estimated_count, scale, short_vectors
from .theta import DEFAULT_POLICY, TruncationPolicy, fast_flatness, flatness

# the fixed ball of radius 15 used for all fading sums in the experiments
PSI_POLICY = TruncationPolicy.fixed(15.0)


# ---------------------------------------------------------------- data model


@dataclass(frozen=True)
class CosetCode:
    """Nested pair eve ⊂ bob with index [bob : eve]."""

    bob: Lattice
    eve: Lattice
    index: int

    def __post_init__(self):
        if self.bob.basis.shape != self.eve.basis.shape:
            raise InvalidSublatticeError("bob and eve must share rank and ambient dimension")
        Z, *_ = np.linalg.lstsq(self.bob.basis, self.eve.basis, rcond=None)
        if np.max(np.abs(Z - np.round(Z))) > 1e-9 * max(1.0, np.max(np.abs(Z))):
            raise InvalidSublatticeError("eve is not a sublattice of bob")
        if not (isinstance(self.index, Integral) and self.index >= 1):
            raise InvalidSublatticeError("index must be a positive integer")
        ratio = self.eve.volume / self.bob.volume
        if abs(ratio - self.index) > 1e-9 * self.index:
            raise InvalidSublatticeError(f"index {self.index} does not match volume ratio {ratio}")

    @classmethod
    def from_pair(cls, bob: Lattice, eve: Lattice) -> "CosetCode":
        Z, *_ = np.linalg.lstsq(bob.basis, eve.basis, rcond=None)
        index = abs(int(round(np.linalg.det(np.round(Z)))))
        return cls(bob, eve, index)

    @classmethod
    def nested(cls, bob: Lattice, factor: int = 2) -> "CosetCode":
        """eve = factor * bob, index factor^m."""
        return cls(bob, scale(bob, factor), int(factor) ** bob.rank)

    @classmethod
    def from_eve(cls, eve: Lattice, factor: int = 2) -> "CosetCode":
        """bob = eve / factor, index factor^m."""
        return cls(scale(eve, 1.0 / factor), eve, int(factor) ** eve.rank)


@dataclass(frozen=True)
class AWGN:
    pass


@dataclass(frozen=True)
class RayleighFast:
    sigma_h: float = 1.0

    def __post_init__(self):
        if not self.sigma_h > 0:
            raise DomainError("sigma_h must be positive")


@dataclass(frozen=True)
class RayleighBlock:
    sigma_h: float = 1.0
    T: int = 1

    def __post_init__(self):
        if not self.sigma_h > 0:
            raise DomainError("sigma_h must be positive")
        if not (isinstance(self.T, Integral) and self.T >= 1):
            raise DomainError("block length T must be a positive integer")


FadingModel = AWGN | RayleighFast | RayleighBlock


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int


@dataclass(frozen=True)
class Bound:
    """A probability upper bound; vacuous when it exceeds 1."""

    value: float
    tail_estimate: float = 0.0

    @property
    def vacuous(self) -> bool:
        return self.value > 1.0

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class PsiResult:
    value: float
    tail_estimate: float
    radius_sq: float

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------- AWGN


def ecdp_awgn(code: CosetCode, sigma: float, policy: TruncationPolicy = DEFAULT_POLICY) -> Bound:
    """Vol(bob) * g(eve; sigma) = (flatness(eve, sigma) + 1) / index."""
    f = flatness(code.eve, sigma, policy)
    return Bound((f.value + 1.0) / code.index, f.tail_estimate / code.index)


# ---------------------------------------------------------------- fading sums


def _groups(n: int, T: int) -> np.ndarray:
    if n % T:
        raise ShapeError(f"block length {T} does not divide dimension {n}")
    return np.arange(n) % (n // T)


def _psi_log_prefactor(n: int, T: int, gamma: float) -> float:
    m = n // T
    return m * gammaln(0.5 * T + 1) - 0.5 * n * math.log(math.pi) + n * math.log(gamma)


def _psi_terms(points, groups, m, gamma, T):
    """prod over groups of (1 + gamma^2 |x_g|^2)^(-(T/2 + 1)) for each row."""
    sq = np.zeros((points.shape[0], m))
    np.add.at(sq.T, groups, (points * points).T)
    return np.exp(-(0.5 * T + 1) * np.log1p(gamma * gamma * sq).sum(axis=1))


def _psi_partial(basis, gram, groups, m, gamma, T, radius_sq):
    """(sum over the ball, sum over the ball shrunk by the ladder factor)."""
    z, norms = short_vectors(gram, radius_sq, half=True)
    pts = z @ basis.T
    terms = _psi_terms(pts, groups, m, gamma, T)
    inner = norms <= radius_sq / 1.25**2
    full = 1.0 + 2.0 * math.fsum(terms)
    part = 1.0 + 2.0 * math.fsum(terms[inner])
    return full, part


def _tail_from_step(full, part):
    # terms along a coordinate direction decay so that the tail scales like R^-2
    return max(full - part, 0.0) * 1.25**2 / (1.25**2 - 1)


def _components(basis, groups):
    """Coordinate blocks that no basis column or fading group links together."""
    n, k = basis.shape
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for g in np.unique(groups):
        idx = np.nonzero(groups == g)[0]
        for j in idx[1:]:
            union(idx[0], j)
    for c in range(k):
        idx = np.nonzero(basis[:, c] != 0)[0]
        for j in idx[1:]:
            union(idx[0], j)
    comps = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    out = []
    for rows in comps.values():
        cols = [c for c in range(k) if np.any(basis[rows, c] != 0)]
        out.append((rows, cols))
    return out


def _psi_sum(eve: Lattice, gamma: float, T: int, policy: TruncationPolicy):
    """Sum over eve of the fading kernel (without the prefactor) and its tail."""
    B = eve.basis
    n = eve.ambient_dim
    groups = _groups(n, T)
    m = n // T
    if policy.mode == "fixed":
        full, part = _psi_partial(B, eve.gram, groups, m, gamma, T, policy.radius**2)
        return full, _tail_from_step(full, part), policy.radius**2
    value, upper, rad = 1.0, 1.0, math.inf
    for rows, cols in _components(B, groups):
        sub = B[np.ix_(rows, cols)]
        g_sub = groups[rows]
        _, g_sub = np.unique(g_sub, return_inverse=True)
        s, t, r2 = _psi_adaptive(sub, g_sub, int(g_sub.max()) + 1, gamma, T, policy)
        value *= s
        upper *= s + t
        rad = min(rad, r2)
    return value, max(upper - value, 0.0), rad


def _psi_adaptive(basis, groups, m, gamma, T, policy):
    gram = basis.T @ basis
    k = basis.shape[1]
    vol = math.sqrt(np.linalg.det(gram))
    # start past the plateau |t| < 1/gamma and wide enough that every annulus holds points
    R = max(10.0 * math.sqrt(float(np.max(np.diag(gram)))), 4.0 / gamma)
    while True:
        full, part = _psi_partial(basis, gram, groups, m, gamma, T, R * R)
        tail = _tail_from_step(full, part)
        nxt = R * 1.25
        if tail <= policy.rel_tol * full or nxt > policy.max_radius or estimated_count(k, vol, nxt * nxt) > policy.max_points:
            return full, tail, R * R
        R = nxt


def psi_bf(eve: Lattice, gamma: float, T: int, policy: TruncationPolicy = PSI_POLICY) -> PsiResult:
    """Block-fading expectation of the Gaussian lattice sum, as a function of gamma = sigma_h / sigma."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not eve.is_full_rank:
        raise UnsupportedRankError("fading sums need a full-rank lattice")
    if not (isinstance(T, Integral) and T >= 1):
        raise DomainError("T must be a positive integer")
    _groups(eve.ambient_dim, T)
    s, tail, r2 = _psi_sum(eve, gamma, T, policy)
    pref = math.exp(_psi_log_prefactor(eve.ambient_dim, T, gamma))
    return PsiResult(pref * s, pref * tail, r2)


def psi_ff(eve: Lattice, gamma: float, policy: TruncationPolicy = PSI_POLICY) -> PsiResult:
    """Fast-fading expectation: (gamma/2)^n sum_t prod_i (1 + t_i^2 gamma^2)^(-3/2)."""
    return psi_bf(eve, gamma, 1, policy)


def ecdp_fading(code: CosetCode, model, sigma: float, policy: TruncationPolicy = PSI_POLICY) -> Bound:
    """Vol(bob) * psi(sigma_h / sigma)."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if isinstance(model, AWGN):
        return ecdp_awgn(code, sigma, policy)
    T = model.T if isinstance(model, RayleighBlock) else 1
    r = psi_bf(code.eve, model.sigma_h / sigma, T, policy)
    v = code.bob.volume
    return Bound(v * r.value, v * r.tail_estimate)


# ---------------------------------------------------------------- Monte Carlo


def rayleigh_gains(model, n: int, seed: int, index: int) -> np.ndarray:
    """Per-coordinate gains of sample `index`, from its own counter-derived stream."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    if isinstance(model, RayleighBlock):
        groups = _groups(n, model.T)
        return rng.rayleigh(model.sigma_h, size=n // model.T)[groups]
    return rng.rayleigh(model.sigma_h, size=n)


def avg_flatness_mc(
    eve: Lattice,
    model,
    sigma: float,
    samples: int,
    seed: int,
    policy: TruncationPolicy = DEFAULT_POLICY,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo estimate of E[flatness(diag(h) eve, sigma)] over Rayleigh gains."""
    if not (isinstance(samples, Integral) and samples >= 1):
        raise DomainError("samples must be a positive integer")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if not eve.is_full_rank:
        raise UnsupportedRankError("fading needs a full-rank lattice")
    if isinstance(model, AWGN):
        return McEstimate(flatness(eve, sigma, policy).value, 0.0, samples, seed)
    B = eve.basis
    n = eve.ambient_dim

    def one(i):
        h = rayleigh_gains(model, n, seed, i)
        hb = h[:, None] * B
        return fast_flatness(hb.T @ hb, sigma, policy.rel_tol, policy.max_points)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.array(list(ex.map(one, range(samples), chunksize=64)))
    else:
        vals = np.array([one(i) for i in range(samples)])
    mean = math.fsum(vals) / samples
    std = float(np.std(vals, ddof=1)) if samples > 1 else 0.0
    return McEstimate(mean, std / math.sqrt(samples), samples, seed)


# ---------------------------------------------------------------- information bounds


def _log(x, base):
    return math.log(x) / math.log(base)


def _check_m(M):
    if not (isinstance(M, Integral) and M >= 4):
        raise DomainError(f"message set size must be an integer >= 4, got {M}")


def info_bound_h(epsilon: float, M: int, log_base: float = 2) -> float:
    """h(eps, M) = 2 eps log M - 2 eps log(2 eps), with h(0, M) = 0."""
    _check_m(M)
    if not 0 <= epsilon <= 0.5:
        raise DomainError(f"epsilon must lie in [0, 1/2], got {epsilon}")
    if epsilon == 0:
        return 0.0
    return 2 * epsilon * _log(M, log_base) - 2 * epsilon * _log(2 * epsilon, log_base)


def info_bound_mod_lambda(E: float, M: int, log_base: float = 2) -> float:
    """Leakage bound for the mod-lattice channel; log M once E >= 1/2."""
    _check_m(M)
    if not E >= 0:
        raise DomainError("E must be nonnegative")
    if E >= 0.5:
        return _log(M, log_base)
    return (1 - 2 * E) * info_bound_h(E, M, log_base) + 2 * E * _log(M, log_base)


def info_bound_gaussian_coset(E: float, M: int, log_base: float = 2) -> float:
    """Leakage bound with discrete Gaussian coset coding; log M once E >= 1/5."""
    _check_m(M)
    if not E >= 0:
        raise DomainError("E must be nonnegative")
    if E >= 0.2:
        return _log(M, log_base)
    if E == 0:
        return 0.0
    x = 5 * E
    return (1 - x) * (x * _log(M, log_base) - x * _log(x, log_base)) + x * _log(M, log_base)


# ---------------------------------------------------------------- INS and heuristics


def ins(
    eve: Lattice,
    exponent: float = 3.0,
    policy: TruncationPolicy = PSI_POLICY,
    zero_tol: float | None = None,
) -> float:
    """Inverse norm sum: sum over nonzero points in the ball of prod |t_i|^-exponent."""
    if policy.mode != "fixed":
        raise DomainError("the inverse norm sum is a truncated quantity; use a fixed radius")
    if zero_tol is None:
        zero_tol = 1e-9 * float(np.max(np.abs(eve.basis)))
    z, _ = short_vectors(eve.gram, policy.radius**2, half=True)
    pts = np.abs(z @ eve.basis.T)
    if len(pts) and np.any(pts <= zero_tol):
        bad = pts[np.nonzero(np.any(pts <= zero_tol, axis=1))[0][0]]
        raise NotFullDiversityError(f"lattice vector {bad} has a zero component")
    return 2.0 * math.fsum(np.exp(-exponent * np.log(pts).sum(axis=1)))


def _exact(t):
    return all(isinstance(x, (Integral, Rational)) for x in t)


def snr_expansion(t) -> tuple:
    """First three coefficients of prod_i (1 + t_i^2 x) in powers of x.

    Exact (Fractions) for integer or rational input.
    """
    t = list(t.tolist() if isinstance(t, np.ndarray) else t)
    if _exact(t):
        t = [Fraction(x) for x in t]
        c1 = sum(x * x for x in t)
        c2 = (c1 * c1 - sum(x**4 for x in t)) / 2
        return (Fraction(1), c1, c2)
    a = np.asarray(t, dtype=float)
    c1 = float(np.sum(a * a))
    return (1.0, c1, 0.5 * (c1 * c1 - float(np.sum(a**4))))


def diversity_variance_ratio(t):
    """|t|_4^4 / |t|_2^4; 1/n for t parallel to (+-1, ..., +-1), 1 for a coordinate axis."""
    t = list(t.tolist() if isinstance(t, np.ndarray) else t)
    if _exact(t):
        t = [Fraction(x) for x in t]
        s2 = sum(x * x for x in t)
        if s2 == 0:
            raise DomainError("zero vector")
        return sum(x**4 for x in t) / (s2 * s2)
    a = np.asarray(t, dtype=float)
    s2 = float(np.sum(a * a))
    if s2 == 0:
        raise DomainError("zero vector")
    return float(np.sum(a**4)) / (s2 * s2)
