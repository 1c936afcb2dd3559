"""Theta series, lattice Gaussian sums and flatness factors.

Series are evaluated from shell profiles (squared norm -> count). Every value
comes with a tail estimate: for lattice theta series it is a rigorous upper
bound obtained by comparing the lattice sum outside the ball with an integral
over the complement of a smaller ball, widened by a covering-radius bound.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import DomainError, UnsupportedRankError
from .lattice import (
    NORM_TOL,
    Lattice,
    estimated_count,
    lll_basis,
    _gso,
    short_vectors,
)

LADDER = 1.25


@dataclass(frozen=True)
class TruncationPolicy:
    """How far series are summed.

    mode "fixed" sums over the ball of the given radius; "adaptive" grows the
    radius by a factor 1.25 until the tail estimate drops below rel_tol
    (relative to the series value), within max_radius and max_points.
    """

    mode: str = "adaptive"
    radius: float = 15.0
    rel_tol: float = 1e-8
    max_radius: float = 1e6
    max_points: int = 5_000_000

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise DomainError(f"unknown truncation mode {self.mode!r}")
        if not 0 < self.rel_tol < 1:
            raise DomainError("rel_tol must lie in (0, 1)")
        if not 0 < self.radius <= self.max_radius:
            raise DomainError("need 0 < radius <= max_radius")
        if self.max_points < 1:
            raise DomainError("max_points must be positive")

    @classmethod
    def fixed(cls, radius: float = 15.0, **kw) -> "TruncationPolicy":
        return cls(mode="fixed", radius=radius, **kw)

    @classmethod
    def adaptive(cls, rel_tol: float = 1e-8, **kw) -> "TruncationPolicy":
        return cls(mode="adaptive", rel_tol=rel_tol, **kw)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class ThetaProfile:
    """Shell spectrum: norms[i] is a squared norm, counts[i] its multiplicity."""

    norms: tuple
    counts: tuple
    radius_sq: float
    tail_estimate: float = 0.0

    @property
    def shells(self) -> dict:
        return dict(zip(self.norms, self.counts))

    @property
    def min_norm(self) -> float:
        return self.norms[1] if len(self.norms) > 1 else math.inf

    @property
    def kissing(self) -> int:
        return self.counts[1] if len(self.counts) > 1 else 0

    def truncate(self, radius_sq: float) -> "ThetaProfile":
        lim = radius_sq + NORM_TOL * max(1.0, radius_sq)
        k = int(np.searchsorted(np.asarray(self.norms), lim, side="right"))
        return ThetaProfile(self.norms[:k], self.counts[:k], radius_sq, self.tail_estimate)

    def evaluate(self, log_q: float) -> float:
        """Sum of count * q**norm with q = exp(log_q)."""
        return profile_sum(self.norms, self.counts, log_q)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("norm_sq,count\n")
        for nrm, c in zip(self.norms, self.counts):
            buf.write(f"{nrm:.12g},{c}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class SeriesResult:
    value: float
    tail_estimate: float
    radius_sq: float
    path: str = ""
    excess: float | None = None  # value - 1 without cancellation

    def __post_init__(self):
        if self.excess is None:
            object.__setattr__(self, "excess", self.value - 1.0)

    def __float__(self):
        return float(self.value)


def profile_terms(norms, counts, log_q) -> np.ndarray:
    return np.exp(np.log(np.asarray(counts, dtype=float)) + np.asarray(norms, dtype=float) * log_q)


def profile_sum(norms, counts, log_q) -> float:
    return math.fsum(profile_terms(norms, counts, log_q))


def bin_norms(norms, weight=1, tol=NORM_TOL):
    """Group sorted squared norms into shells; returns (norms, counts)."""
    if len(norms) == 0:
        return (), ()
    x = np.sort(np.asarray(norms, dtype=float))
    starts = np.concatenate(([0], np.nonzero(np.diff(x) > tol)[0] + 1))
    sizes = np.diff(np.concatenate((starts, [len(x)])))
    return tuple(float(v) for v in x[starts]), tuple(int(weight) * int(s) for s in sizes)


def combine_profiles(a: ThetaProfile, b: ThetaProfile, radius_sq: float) -> ThetaProfile:
    """Profile of the orthogonal sum, truncated at radius_sq."""
    lim = radius_sq + NORM_TOL * max(1.0, radius_sq)
    na, nb = np.asarray(a.norms), np.asarray(b.norms)
    sums = (na[:, None] + nb[None, :]).ravel()
    prods = [ca * cb for ca in a.counts for cb in b.counts]
    keep = np.nonzero(sums <= lim)[0]
    order = keep[np.argsort(sums[keep], kind="stable")]
    norms, counts = [], []
    for i in order:
        s = float(sums[i])
        if norms and s - norms[-1] <= NORM_TOL:
            counts[-1] += prods[i]
        else:
            norms.append(s)
            counts.append(prods[i])
    return ThetaProfile(tuple(norms), tuple(counts), radius_sq)


# ---------------------------------------------------------------- tail bound


def gaussian_tail_bound(m, vol, a, mu, R):
    """Upper bound on sum over lattice points |x| > R of exp(-a |x|^2).

    Each point's Voronoi cell has volume vol and lies in the ball of radius
    mu around it, so the sum is at most
    (1/vol) * integral over |y| > R - mu of exp(-a * max(|y| - mu, 0)^2).
    Works for shifted lattices too. R may be an array.
    """
    R = np.atleast_1d(np.asarray(R, dtype=float))
    r0 = np.maximum(R - mu, 0.0)
    log_surface = math.log(2.0) + 0.5 * m * math.log(math.pi) - gammaln(0.5 * m)
    with np.errstate(over="ignore"):
        flat = np.where(r0 < mu, (mu**m - np.minimum(r0, mu) ** m) / m, 0.0)
    s0 = np.maximum(R - 2 * mu, 0.0)
    k = np.arange(m, dtype=float)
    log_binom = gammaln(m) - gammaln(k + 1) - gammaln(m - k)
    with np.errstate(divide="ignore"):
        log_mu_pow = np.where(m - 1 - k > 0, (m - 1 - k) * math.log(mu) if mu > 0 else -np.inf, 0.0)
        log_inc = np.log(gammaincc(0.5 * (k[None, :] + 1), a * s0[:, None] ** 2))
    log_terms = (
        log_binom + log_mu_pow + math.log(0.5) - 0.5 * (k + 1) * math.log(a) + gammaln(0.5 * (k + 1))
    )[None, :] + log_inc
    decay = np.exp(log_terms).sum(axis=1)
    out = np.exp(log_surface - math.log(vol)) * (flat + decay)
    return out if out.shape[0] > 1 else float(out[0])


# ---------------------------------------------------------------- sources


class LatticeSource:
    """Shell spectrum source backed by a Gram matrix.

    Only the Gram matrix matters for norms, so lattices of any rank are
    handled. Orthogonal blocks are detected and treated separately; rank-1
    blocks use the closed form a*k^2.
    """

    def __init__(self, gram):
        g = np.array(gram, dtype=float)
        self.gram = 0.5 * (g + g.T)
        self.rank = self.gram.shape[0]
        sign, logdet = np.linalg.slogdet(self.gram)
        if sign <= 0:
            raise DomainError("Gram matrix is not positive definite")
        self.volume = math.exp(0.5 * logdet)
        self._profile = None
        self._min_norm = None
        self._cov_sq = None
        self._dual = None
        self.blocks = _split_blocks(self.gram) if self.rank > 1 else None

    def dual(self):
        if self._dual is None:
            self._dual = LatticeSource(np.linalg.inv(self.gram))
        return self._dual

    def scaled(self, a):
        return LatticeSource(a * a * self.gram)

    @property
    def min_norm(self) -> float:
        if self._min_norm is None:
            if self.rank == 1:
                self._min_norm = float(self.gram[0, 0])
            elif self.blocks:
                self._min_norm = min(b.min_norm for b, _ in self.blocks)
            else:
                r = np.linalg.cholesky(self.gram).T
                B, _ = lll_basis(r)
                r0 = float(np.min(np.einsum("ij,ij->j", B, B)))
                _, norms = short_vectors(self.gram, r0, half=True, coords=False)
                self._min_norm = float(norms.min())
        return self._min_norm

    @property
    def covering_sq(self) -> float:
        """Upper bound on the squared covering radius."""
        if self._cov_sq is None:
            if self.rank == 1:
                self._cov_sq = 0.25 * float(self.gram[0, 0])
            elif self.blocks:
                self._cov_sq = sum(mult * b.covering_sq for b, mult in self.blocks)
            else:
                r = np.linalg.cholesky(self.gram).T
                B, _ = lll_basis(r)
                _, bn = _gso(B)
                self._cov_sq = 0.25 * float(np.sum(bn))
        return self._cov_sq

    def profile(self, radius_sq: float) -> ThetaProfile:
        if self._profile is not None and self._profile.radius_sq >= radius_sq:
            return self._profile.truncate(radius_sq)
        if self.rank == 1:
            a = float(self.gram[0, 0])
            kmax = int(math.floor(math.sqrt((radius_sq + NORM_TOL * max(1.0, radius_sq)) / a)))
            ks = range(1, kmax + 1)
            prof = ThetaProfile((0.0,) + tuple(a * k * k for k in ks), (1,) + (2,) * kmax, radius_sq)
        elif self.blocks:
            prof = None
            for b, mult in self.blocks:
                bp = b.profile(radius_sq)
                for _ in range(mult):
                    prof = bp if prof is None else combine_profiles(prof, bp, radius_sq)
        else:
            _, norms = short_vectors(self.gram, radius_sq, half=True, coords=False)
            nn, cc = bin_norms(norms, weight=2)
            prof = ThetaProfile((0.0,) + nn, (1,) + cc, radius_sq)
        self._profile = prof
        return prof


def _split_blocks(gram):
    """Orthogonal components of a Gram matrix, grouped by equality."""
    m = gram.shape[0]
    d = np.sqrt(np.diag(gram))
    adj = np.abs(gram) > 1e-12 * np.outer(d, d)
    label = -np.ones(m, dtype=int)
    comps = []
    for s in range(m):
        if label[s] >= 0:
            continue
        stack, comp = [s], []
        label[s] = len(comps)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.nonzero(adj[i])[0]:
                if label[j] < 0:
                    label[j] = len(comps)
                    stack.append(j)
        comps.append(sorted(comp))
    if len(comps) == 1:
        return None
    groups = []
    for comp in comps:
        g = gram[np.ix_(comp, comp)]
        for entry in groups:
            if entry[0].shape == g.shape and np.array_equal(entry[0], g):
                entry[1] += 1
                break
        else:
            groups.append([g, 1])
    return [(LatticeSource(g), mult) for g, mult in groups]


_RECOGNIZERS = []


def register_source(fn):
    """Register fn(Lattice) -> source or None, consulted before the generic source."""
    _RECOGNIZERS.append(fn)
    return fn


@lru_cache(maxsize=256)
def source_for(L: Lattice):
    for fn in _RECOGNIZERS:
        src = fn(L)
        if src is not None:
            return src
    return LatticeSource(reduced_gram(L))


def reduced_gram(L: Lattice) -> np.ndarray:
    """Gram matrix of an LLL-reduced basis of L, each entry correctly rounded.

    B^T B of a skewed basis loses digits to cancellation, and later norms
    z^T G z with large z magnify that loss. Reducing first and forming the
    products in exact rational arithmetic keeps norms accurate to a few ulps.
    """
    _, U = lll_basis(L.basis)
    B = [[Fraction(x) for x in row] for row in L.basis.tolist()]
    U = U.tolist()
    n, m = len(B), len(U)
    W = [[sum(B[i][k] * U[k][j] for k in range(m) if U[k][j]) for j in range(m)] for i in range(n)]
    G = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            G[a, b] = G[b, a] = float(sum(W[i][a] * W[i][b] for i in range(n)))
    return G


def _as_source(obj):
    return source_for(obj) if isinstance(obj, Lattice) else obj


# ---------------------------------------------------------------- series


def theta_series(src, log_q: float, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """Theta series of a source at q = exp(log_q) under a truncation policy."""
    src = _as_source(src)
    if not log_q < 0:
        raise DomainError("q must lie in (0, 1)")
    blocks = getattr(src, "blocks", None)
    if blocks:
        total = sum(mult for _, mult in blocks)
        sub = replace(policy, rel_tol=policy.rel_tol / total) if policy.mode == "adaptive" else policy
        value, upper, rad, log1p_sum = 1.0, 1.0, math.inf, 0.0
        for b, mult in blocks:
            r = theta_series(b, log_q, sub)
            value *= r.value**mult
            upper *= (r.value + r.tail_estimate) ** mult
            rad = min(rad, r.radius_sq)
            log1p_sum += mult * math.log1p(r.excess)
        return SeriesResult(value, max(upper - value, 0.0), rad, excess=math.expm1(log1p_sum))
    radius_sq = choose_radius_sq(src, -log_q, policy)
    prof = src.profile(radius_sq)
    terms = profile_terms(prof.norms, prof.counts, log_q)
    excess = math.fsum(terms[1:])  # shell 0 is the zero vector
    value = 1.0 + excess
    tail = gaussian_tail_bound(src.rank, src.volume, -log_q, math.sqrt(src.covering_sq), math.sqrt(radius_sq))
    return SeriesResult(value, float(tail), radius_sq, excess=excess)


def choose_radius_sq(src, a: float, policy: TruncationPolicy) -> float:
    """Squared radius for sum of exp(-a |x|^2) under the policy."""
    if policy.mode == "fixed":
        return policy.radius**2
    mu = math.sqrt(src.covering_sq)
    m = src.rank
    r_start = max(math.sqrt(src.min_norm), 1e-3 * mu)
    ladder = r_start * LADDER ** np.arange(200)
    feasible = (ladder <= policy.max_radius) & (
        np.array([estimated_count(m, src.volume, r * r) for r in ladder]) <= policy.max_points
    )
    if not feasible[0]:
        return float(ladder[0] ** 2)
    bounds = gaussian_tail_bound(m, src.volume, a, mu, ladder)
    ok = np.nonzero((bounds <= policy.rel_tol) & feasible)[0]
    if len(ok):
        return float(ladder[ok[0]] ** 2)
    return float(ladder[np.nonzero(feasible)[0][-1]] ** 2)


def theta(L, q: float, policy: TruncationPolicy = DEFAULT_POLICY):
    """Theta series value and the profile it was summed over."""
    if not 0 < q < 1:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    src = _as_source(L)
    log_q = math.log(q)
    if policy.mode == "fixed":
        radius_sq = policy.radius**2
    else:
        radius_sq = choose_radius_sq(src, -log_q, policy)
    prof = src.profile(radius_sq)
    value = prof.evaluate(log_q)
    tail = float(gaussian_tail_bound(src.rank, src.volume, -log_q, math.sqrt(src.covering_sq), math.sqrt(radius_sq)))
    return value, replace(prof, tail_estimate=tail)


def theta_profile(L, radius_sq: float) -> ThetaProfile:
    return _as_source(L).profile(radius_sq)


def gaussian_sum(L: Lattice, shift, sigma: float, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Sum of the centred Gaussian density of width sigma over L + shift."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    s = np.asarray(shift, dtype=float).ravel()
    if s.shape != (L.ambient_dim,):
        raise DomainError(f"shift must have length {L.ambient_dim}")
    m = L.rank
    log_pref = -0.5 * m * math.log(2 * math.pi * sigma**2)
    a = 1.0 / (2 * sigma**2)
    if not np.any(s):
        r = theta_series(source_for(L), -a, policy)
        return math.exp(log_pref) * r.value
    u, *_ = np.linalg.lstsq(L.basis, s, rcond=None)
    perp = s - L.basis @ u
    perp_sq = float(perp @ perp)
    u = u - np.round(u)
    src = source_for(L)
    radius_sq = choose_radius_sq(src, a, policy)
    _, norms = short_vectors(L.gram, radius_sq, offset=u, skip_zero=False, coords=False)
    total = math.fsum(np.exp(-a * norms))
    return math.exp(log_pref - a * perp_sq) * total


# ---------------------------------------------------------------- flatness


@dataclass(frozen=True)
class FlatnessResult:
    value: float
    tail_estimate: float
    path: str
    radius_sq: float

    def __float__(self):
        return float(self.value)


def dual_exponent(sigma: float) -> float:
    """a such that the dual series is the theta series of the dual at q = exp(-a).

    Poisson summation of the width-sigma Gaussian gives a = 2 pi^2 sigma^2.
    """
    return 2 * math.pi**2 * sigma**2


def _check_sigma(sigma):
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be a positive finite number, got {sigma}")


def _rounding(total):
    """Rounding allowance for total - 1, where total carries a few ulps from the sum and prefactor."""
    return 8 * np.finfo(float).eps * abs(total)


def _primal(src, sigma, policy):
    r = theta_series(src, -1.0 / (2 * sigma**2), policy)
    pref = math.exp(math.log(src.volume) - 0.5 * src.rank * math.log(2 * math.pi * sigma**2))
    total = pref * r.value
    return FlatnessResult(total - 1.0, pref * r.tail_estimate + _rounding(total), "primal", r.radius_sq)


def _dual(src, sigma, policy):
    r = theta_series(src.dual(), -dual_exponent(sigma), policy)
    # the excess is summed directly, so only relative rounding remains
    return FlatnessResult(r.excess, r.tail_estimate + _rounding(r.excess), "dual", r.radius_sq)


def flatness_primal(L, sigma: float, policy: TruncationPolicy = DEFAULT_POLICY) -> FlatnessResult:
    _check_sigma(sigma)
    return _primal(_as_source(L), sigma, policy)


def flatness_dual(L, sigma: float, policy: TruncationPolicy = DEFAULT_POLICY) -> FlatnessResult:
    _check_sigma(sigma)
    if isinstance(L, Lattice) and not L.is_full_rank:
        raise UnsupportedRankError("dual formula needs a full-rank lattice; use the primal path")
    return _dual(_as_source(L), sigma, policy)


def prefers_dual(src, sigma: float) -> bool:
    """True when the dual series decays faster than the primal one."""
    return dual_exponent(sigma) * src.dual().min_norm > src.min_norm / (2 * sigma**2)


def flatness(L, sigma: float, policy: TruncationPolicy = DEFAULT_POLICY) -> FlatnessResult:
    """Flatness factor, evaluated through whichever series converges faster."""
    _check_sigma(sigma)
    src = _as_source(L)
    return _dual(src, sigma, policy) if prefers_dual(src, sigma) else _primal(src, sigma, policy)


def shaping_adjusted_flatness(
    L: Lattice, h_diag, sigma: float, sigma_s: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> FlatnessResult:
    """Dual sum of exp(-2 pi^2 sum_i t_i^2 / (h_i^2/sigma^2 + 1/sigma_s^2)) minus 1.

    Evaluated as the flatness factor of diag(sqrt(sigma^2/sigma_s^2 + h_i^2)) L
    at sigma.
    """
    _check_sigma(sigma)
    _check_sigma(sigma_s)
    if not L.is_full_rank:
        raise UnsupportedRankError("shaping-adjusted flatness needs a full-rank lattice")
    h = np.asarray(h_diag, dtype=float).ravel()
    if h.shape != (L.ambient_dim,) or np.any(h < 0):
        raise DomainError("h_diag must hold ambient_dim nonnegative entries")
    c = np.sqrt((sigma / sigma_s) ** 2 + h * h)
    return flatness(Lattice(c[:, None] * L.basis), sigma, policy)


# ---------------------------------------------------------------- fast path


def _theta_1d(a, log_q, rel_tol):
    """Theta series of sqrt(a) Z."""
    kmax = int(math.ceil(math.sqrt((math.log(2.0 / rel_tol) + 1.0) / (a * -log_q)))) + 1
    k = np.arange(1, kmax + 1, dtype=float)
    return 1.0 + 2.0 * math.fsum(np.exp(a * log_q * k * k))


def fast_flatness(gram, sigma: float, rel_tol: float = 1e-8, max_points: int = 5_000_000) -> float:
    """Flatness factor from a Gram matrix without reduction or caching.

    Used inside Monte Carlo loops. The path is picked by comparing the
    Gaussian-heuristic point counts of the two series; the radius comes from
    the rigorous tail bound with a Babai covering estimate of the given basis.
    """
    g = np.asarray(gram, dtype=float)
    m = g.shape[0]
    if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        prod = 1.0
        for a in np.diag(g):
            if dual_exponent(sigma) / a > a / (2 * sigma**2):
                prod *= _theta_1d(1.0 / a, -dual_exponent(sigma), rel_tol / m)
            else:
                pref = math.sqrt(a / (2 * math.pi * sigma**2))
                prod *= pref * _theta_1d(a, -1.0 / (2 * sigma**2), rel_tol / m)
        return prod - 1.0
    sign, logdet = np.linalg.slogdet(g)
    log_vol = 0.5 * logdet
    log_tol = math.log(1.0 / rel_tol)
    # log point counts needed by each path, up to a common constant
    primal_cost = 0.5 * m * math.log(2 * sigma**2 * log_tol) - log_vol
    dual_cost = 0.5 * m * math.log(log_tol / dual_exponent(sigma)) + log_vol
    if dual_cost < primal_cost:
        work, a, pref = np.linalg.inv(g), dual_exponent(sigma), 1.0
        vol = math.exp(-log_vol)
    else:
        work, a = g, 1.0 / (2 * sigma**2)
        vol = math.exp(log_vol)
        pref = math.exp(log_vol - 0.5 * m * math.log(2 * math.pi * sigma**2))
    work = 0.5 * (work + work.T)
    r = np.linalg.cholesky(work).T
    mu = 0.5 * math.sqrt(float(np.sum(np.diag(r) ** 2)))
    r0 = math.sqrt(float(np.min(np.diag(work))))
    ladder = r0 * LADDER ** np.arange(120)
    bounds = gaussian_tail_bound(m, vol, a, mu, ladder)
    log_counts = 0.5 * m * math.log(math.pi) - gammaln(0.5 * m + 1) + m * np.log(ladder) - math.log(vol)
    ok = np.nonzero((bounds <= rel_tol) | (log_counts > math.log(max_points)))[0]
    R = ladder[ok[0]] if len(ok) else ladder[-1]
    # a skewed basis can put even the first rung past the point cap
    log_r_cap = (math.log(max_points) + math.log(vol) - 0.5 * m * math.log(math.pi) + gammaln(0.5 * m + 1)) / m
    R = min(R, math.exp(log_r_cap))
    _, norms = short_vectors(work, R * R, half=True, coords=False, reduce=False)
    # pairwise summation: deterministic for a given array and cheap on large ones
    return pref * (1.0 + 2.0 * float(np.sum(np.exp(-a * norms)))) - 1.0


__all__ = [
    "TruncationPolicy",
    "ThetaProfile",
    "SeriesResult",
    "FlatnessResult",
    "LatticeSource",
    "register_source",
    "source_for",
    "theta",
    "theta_series",
    "theta_profile",
    "gaussian_sum",
    "gaussian_tail_bound",
    "flatness",
    "flatness_primal",
    "flatness_dual",
    "shaping_adjusted_flatness",
    "fast_flatness",
    "prefers_dual",
    "combine_profiles",
    "bin_norms",
]
