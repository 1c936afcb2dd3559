"""Lattice construction, reduction and enumeration.

Bases follow the column convention: a lattice of rank m in R^n is stored as
an n x m matrix whose columns are the generators.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from ._enum import enumerate_ball
from .errors import (
    BudgetExceededError,
    DomainError,
    InvalidLatticeError,
    InvalidSublatticeError,
    MalformedInputError,
    UnsupportedRankError,
)

DEFAULT_POINT_BUDGET = 10**8
NORM_TOL = 1e-9


def point_budget() -> int:
    """Enumeration cap; LATSEC_POINT_BUDGET overrides the default of 1e8."""
    env = os.environ.get("LATSEC_POINT_BUDGET")
    return int(float(env)) if env else DEFAULT_POINT_BUDGET


@dataclass(frozen=True, eq=False)
class Lattice:
    basis: np.ndarray
    label: str = ""

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2:
            raise InvalidLatticeError(f"basis must be a 2-d array, got shape {b.shape}")
        n, m = b.shape
        if not 1 <= m <= n:
            raise InvalidLatticeError(f"need 1 <= rank <= ambient dimension, got {m} x {n}")
        if not np.all(np.isfinite(b)):
            raise InvalidLatticeError("basis has non-finite entries")
        ev = np.linalg.eigvalsh(b.T @ b)
        if ev[0] <= 1e-13 * max(ev[-1], 1e-300):
            raise InvalidLatticeError("basis columns are linearly dependent")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.ambient_dim

    @cached_property
    def gram(self) -> np.ndarray:
        g = self.basis.T @ self.basis
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        return g

    @cached_property
    def volume(self) -> float:
        return volume(self)

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.basis.shape == other.basis.shape and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash((self.basis.shape, self.basis.tobytes()))

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<Lattice{tag} rank={self.rank} dim={self.ambient_dim}>"


@dataclass(frozen=True)
class GramDecomposition:
    gram: np.ndarray
    cholesky_factor: np.ndarray  # upper triangular R, R^T R = gram
    sqrt_factor: np.ndarray  # symmetric Q, Q^T Q = gram


@dataclass(frozen=True)
class ShellEnumeration:
    """All nonzero lattice points in the closed ball of squared radius radius_sq.

    coords are integer coordinates (rows), points the ambient vectors; both
    are sorted lexicographically on coords. Every +-pair is stored explicitly.
    """

    radius_sq: float
    coords: np.ndarray
    points: np.ndarray
    norms: np.ndarray
    complete: bool = True

    def __len__(self):
        return len(self.norms)


# ---------------------------------------------------------------- basic ops


def volume(L: Lattice) -> float:
    sign, logdet = np.linalg.slogdet(L.basis.T @ L.basis)
    if sign <= 0:
        raise InvalidLatticeError("singular Gram matrix")
    return float(math.exp(0.5 * logdet))


def dual(L: Lattice) -> Lattice:
    if not L.is_full_rank:
        raise UnsupportedRankError("dual lattice is only implemented for full-rank lattices")
    return Lattice(np.linalg.inv(L.basis).T, label=f"{L.label}*" if L.label else "")


def sublattice(L: Lattice, Z) -> tuple[Lattice, int | None]:
    """Sublattice with basis B @ Z and its index (None unless Z is square)."""
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] != L.rank:
        raise InvalidSublatticeError(f"coordinate matrix must have {L.rank} rows")
    if not np.all(np.equal(np.round(Z), Z)):
        raise InvalidSublatticeError("coordinate matrix must be integral")
    Z = np.round(Z).astype(np.int64)
    try:
        sub = Lattice(L.basis @ Z, label=L.label)
    except InvalidLatticeError as exc:
        raise InvalidSublatticeError(str(exc)) from None
    if Z.shape[0] != Z.shape[1]:
        return sub, None
    return sub, abs(int(round(np.linalg.det(Z))))


def scale(L: Lattice, a: float) -> Lattice:
    if not a > 0:
        raise DomainError(f"scale factor must be positive, got {a}")
    return Lattice(a * L.basis, label=L.label)


def unit_volume(L: Lattice) -> Lattice:
    """Rescale so that the volume is 1."""
    return scale(L, L.volume ** (-1.0 / L.rank))


def gram_decomposition(L: Lattice) -> GramDecomposition:
    g = np.array(L.gram)
    r = np.linalg.cholesky(g).T
    w, v = np.linalg.eigh(g)
    w = np.maximum(w, 1e-12 * w[-1])
    q = (v * np.sqrt(w)) @ v.T
    return GramDecomposition(gram=g, cholesky_factor=r, sqrt_factor=0.5 * (q + q.T))


def full_rank_equivalent(L: Lattice) -> Lattice:
    """Same Gram matrix, realised as a full lattice of R^m via Q = sqrt(B^T B)."""
    if L.is_full_rank:
        return L
    return Lattice(gram_decomposition(L).sqrt_factor, label=L.label)


# ---------------------------------------------------------------- LLL


def _gso(B):
    _, r = np.linalg.qr(B)
    d = np.diag(r)
    return (r / d[:, None]).T, d * d


def lll_basis(B, delta=0.99):
    """LLL-reduce the columns of B; returns (reduced basis, unimodular U) with B @ U."""
    B = np.array(B, dtype=float)
    m = B.shape[1]
    U = np.eye(m, dtype=np.int64)
    if m == 1:
        return B, U
    mu, bn = _gso(B)
    k = 1
    max_iter = 100000 + 1000 * m * m
    it = 0
    while k < m:
        it += 1
        if it > max_iter:
            raise RuntimeError("LLL did not terminate")
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[:, k] -= q * B[:, j]
                U[:, k] -= q * U[:, j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        # relative slack so that exact ties (possible at delta = 1) do not swap forever
        if bn[k] >= (delta - mu[k, k - 1] ** 2) * bn[k - 1] * (1 - 1e-12):
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            mu, bn = _gso(B)
            k = max(k - 1, 1)
    return B, U


def lll_reduce(L: Lattice, delta: float = 0.99) -> Lattice:
    if not 0.25 < delta <= 1:
        raise DomainError(f"LLL parameter must lie in (1/4, 1], got {delta}")
    B, _ = lll_basis(L.basis, delta)
    return Lattice(B, label=L.label)


def covering_radius_bound(gram) -> float:
    """Upper bound on the covering radius from Babai's nearest plane.

    Uses half the root sum of squared Gram-Schmidt lengths of an LLL-reduced
    basis.
    """
    r = np.linalg.cholesky(np.asarray(gram)).T
    B, _ = lll_basis(r)
    _, bn = _gso(B)
    return 0.5 * math.sqrt(float(np.sum(bn)))


def log_ball_volume(m: int, radius: float) -> float:
    if radius <= 0:
        return -math.inf
    return 0.5 * m * math.log(math.pi) - gammaln(0.5 * m + 1) + m * math.log(radius)


def estimated_count(m: int, vol: float, radius_sq: float) -> float:
    """Gaussian-heuristic number of lattice points in a ball (inf on overflow)."""
    x = log_ball_volume(m, math.sqrt(max(radius_sq, 0.0))) - math.log(vol)
    return math.exp(x) if x < 700 else math.inf


# ---------------------------------------------------------------- enumeration


def short_vectors(
    gram,
    radius_sq,
    *,
    offset=None,
    half=False,
    skip_zero=True,
    coords=True,
    reduce=True,
    budget=None,
):
    """Integer vectors z with (z+u)^T G (z+u) <= radius_sq.

    Returns (z, norms) in the coordinates of ``gram``. With half=True only one
    of each +-pair is returned (offset must be zero). The boundary is
    inclusive up to NORM_TOL * max(1, radius_sq).
    """
    g = np.asarray(gram, dtype=float)
    m = g.shape[0]
    budget = point_budget() if budget is None else int(budget)
    vol = math.sqrt(max(np.linalg.det(g), 1e-300))
    est = estimated_count(m, vol, radius_sq)
    if est > budget:
        raise BudgetExceededError(
            f"about {est:.3g} lattice points within squared radius {radius_sq:g}; cap is {budget}"
        )
    tol = NORM_TOL * max(1.0, radius_sq)
    if reduce:
        r0 = np.linalg.cholesky(g).T
        _, U = lll_basis(r0)
        g_work = U.T @ g @ U
    else:
        U = None
        g_work = g
    g_work = 0.5 * (g_work + g_work.T)
    r = np.linalg.cholesky(g_work).T
    diag = np.diag(r)
    if np.any(diag <= 1e-12 * diag.max()):
        raise InvalidLatticeError("near-degenerate Gram matrix")
    mu = r / diag[:, None]
    d = diag * diag
    if offset is None:
        u = np.zeros(m)
    else:
        u = np.asarray(offset, dtype=float)
        if half and np.any(u):
            raise DomainError("half enumeration needs a zero offset")
        if U is not None:
            u = np.linalg.solve(U.astype(float), u)
    z, norms, overflow = enumerate_ball(
        np.ascontiguousarray(mu), d, u, float(radius_sq + tol), bool(half), bool(skip_zero), bool(coords), budget
    )
    if overflow:
        raise BudgetExceededError(f"more than {budget} lattice points within squared radius {radius_sq:g}")
    if coords and U is not None:
        z = z @ U.T
    return z, norms


def enumerate_points(L: Lattice, radius_sq: float) -> ShellEnumeration:
    if not radius_sq > 0:
        raise DomainError("radius_sq must be positive")
    z, _ = short_vectors(L.gram, radius_sq)
    if len(z):
        z = z[np.lexsort(z.T[::-1])]
    pts = z @ L.basis.T if len(z) else np.zeros((0, L.ambient_dim))
    norms = np.einsum("ij,ij->i", pts, pts)
    return ShellEnumeration(radius_sq=float(radius_sq), coords=z, points=pts, norms=norms)


def minimal_norm(L: Lattice) -> tuple[float, np.ndarray]:
    """Minimal squared length and all vectors (ambient coordinates) attaining it."""
    B, _ = lll_basis(L.basis)
    r0 = float(np.min(np.einsum("ij,ij->j", B, B)))
    z, norms = short_vectors(L.gram, r0)
    lam = float(norms.min())
    keep = norms <= lam + NORM_TOL * max(1.0, lam)
    z = z[keep]
    z = z[np.lexsort(z.T[::-1])]
    vecs = z @ L.basis.T
    lam = float(np.min(np.einsum("ij,ij->i", vecs, vecs)))
    return lam, vecs


def is_well_rounded(L: Lattice) -> bool:
    _, vecs = minimal_norm(L)
    s = np.linalg.svd(vecs, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0])) == L.rank


def diversity_lower_report(L: Lattice, radius_sq: float, zero_tol: float | None = None) -> int:
    """Fewest nonzero components among enumerated nonzero lattice vectors.

    A diagnostic on the ball only: a value equal to ambient_dim does not prove
    full diversity.
    """
    if zero_tol is None:
        zero_tol = NORM_TOL * float(np.max(np.abs(L.basis)))
    pts = enumerate_points(L, radius_sq).points
    if len(pts) == 0:
        return L.ambient_dim
    return int(np.min(np.sum(np.abs(pts) > zero_tol, axis=1)))


# ---------------------------------------------------------------- JSON


def lattice_to_json(L: Lattice) -> dict:
    return {
        "label": L.label,
        "ambient_dim": L.ambient_dim,
        "rank": L.rank,
        "basis_columns": [[float(x) for x in col] for col in L.basis.T],
    }


def lattice_from_json(obj: dict) -> Lattice:
    try:
        n = int(obj["ambient_dim"])
        m = int(obj["rank"])
        cols = obj["basis_columns"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"malformed lattice JSON: {exc!r}") from None
    if not isinstance(cols, list) or len(cols) != m or any(not isinstance(c, list) or len(c) != n for c in cols):
        raise MalformedInputError("basis_columns does not match ambient_dim/rank")
    return Lattice(np.array(cols, dtype=float).T.reshape(n, m), label=str(obj.get("label", "")))


def save_lattice(L: Lattice, path) -> None:
    Path(path).write_text(json.dumps(lattice_to_json(L), indent=1) + "\n")


def load_lattice(path) -> Lattice:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedInputError(f"{path}: expected a JSON object")
    return lattice_from_json(obj)
