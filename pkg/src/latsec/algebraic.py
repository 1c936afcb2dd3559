"""Full-diversity lattices from totally real quartic and biquadratic fields.

A quartic field is given by a monic integer polynomial; its lattice is the
canonical embedding of the equation order Z[theta] (a Vandermonde matrix of
the real roots). A biquadratic field Q(sqrt p, sqrt q) uses the order with
basis 1, sqrt p, sqrt q, sqrt pq.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import sympy

from .errors import DomainError, GenerationFailedError, NumericError
from .lattice import Lattice, diversity_lower_report, lll_basis, unit_volume

MAX_DRAWS = 10_000


@dataclass(frozen=True)
class Quartic:
    """x^4 + c3 x^3 + c2 x^2 + c1 x + c0, coeffs = (c0, c1, c2, c3)."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        if len(c) != 4:
            raise DomainError("a quartic needs exactly four coefficients c0..c3")
        object.__setattr__(self, "coeffs", c)
        reason = quartic_rejection(c)
        if reason:
            raise DomainError(f"x^4 + ... with coefficients {c} rejected: {reason}")

    def poly(self):
        x = sympy.Symbol("x")
        c0, c1, c2, c3 = self.coeffs
        return sympy.Poly(x**4 + c3 * x**3 + c2 * x**2 + c1 * x + c0, x)


@dataclass(frozen=True)
class Biquadratic:
    p: int
    q: int

    def __post_init__(self):
        if not (sympy.isprime(self.p) and sympy.isprime(self.q)) or self.p == self.q:
            raise DomainError(f"need two distinct primes, got {self.p}, {self.q}")


FieldSpec = Quartic | Biquadratic


@dataclass(frozen=True)
class AlgebraicLattice:
    lattice: Lattice  # unit volume
    field: object
    disc_proxy: float  # det(B^T B) of the unnormalized embedding
    raw: Lattice  # unnormalized embedding

    @property
    def sqrt_disc(self) -> float:
        return math.sqrt(self.disc_proxy)

    def full_diversity_certificate(self, radius: float = 15.0) -> bool:
        """True when no enumerated vector in the ball has a zero coordinate."""
        return diversity_lower_report(self.lattice, radius * radius) == self.lattice.ambient_dim


def quartic_rejection(coeffs) -> str | None:
    """Why a monic quartic fails to define a totally real quartic field, or None."""
    c0, c1, c2, c3 = coeffs
    x = sympy.Symbol("x")
    P = sympy.Poly(x**4 + c3 * x**3 + c2 * x**2 + c1 * x + c0, x)
    if P.discriminant() == 0:
        return "repeated roots"
    if not P.is_irreducible:
        return "reducible over Q"
    if P.count_roots() != 4:
        return "not all roots real"
    return None


def random_totally_real_quartic(seed: int, coeff_bound: int = 10) -> Quartic:
    """Draw monic quartics with coefficients in [-coeff_bound, coeff_bound] until one is accepted."""
    if coeff_bound < 1:
        raise DomainError("coeff_bound must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_DRAWS):
        c = rng.integers(-coeff_bound, coeff_bound + 1, size=4)
        if c[0] == 0:
            continue
        r = np.roots([1, c[3], c[2], c[1], c[0]])
        if np.max(np.abs(r.imag)) > 1e-6 * (1 + np.max(np.abs(r))):
            continue
        if quartic_rejection(tuple(int(v) for v in c)) is None:
            return Quartic(tuple(int(v) for v in c))
    raise GenerationFailedError(f"no totally real quartic after {MAX_DRAWS} draws (seed {seed})")


def real_roots(coeffs, tol: float = 1e-12) -> np.ndarray:
    """Sorted real roots of the monic quartic, polished by Newton steps."""
    c0, c1, c2, c3 = coeffs
    p = np.array([1.0, c3, c2, c1, c0])
    dp = np.polyder(p)
    roots = np.sort(np.roots(p).real)
    for _ in range(50):
        step = np.polyval(p, roots) / np.polyval(dp, roots)
        roots = roots - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(roots))):
            break
    scale = np.polyval(np.abs(p), np.abs(roots))
    if np.any(np.abs(np.polyval(p, roots)) > tol * scale) or len(np.unique(roots)) != 4:
        raise NumericError(f"root refinement did not converge for {coeffs}")
    return np.sort(roots)


def embedding_matrix(spec) -> np.ndarray:
    """Unnormalized basis: rows are the real embeddings, columns the order basis."""
    if isinstance(spec, Quartic):
        r = real_roots(spec.coeffs)
        return np.vander(r, 4, increasing=True)
    if isinstance(spec, Biquadratic):
        sp, sq = math.sqrt(spec.p), math.sqrt(spec.q)
        rows = [[1.0, s1 * sp, s2 * sq, s1 * s2 * sp * sq] for s1 in (1, -1) for s2 in (1, -1)]
        return np.array(rows)
    raise DomainError(f"unknown field spec {spec!r}")


def embed(spec) -> AlgebraicLattice:
    B = embedding_matrix(spec)
    raw = Lattice(B)
    disc = float(np.linalg.det(B.T @ B))
    return AlgebraicLattice(unit_volume(raw), spec, disc, raw)


class AmbiguousBasisWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProcedureResult:
    lattice: Lattice  # generated by m1, 2^k_i m_i
    reduced_basis: np.ndarray  # LLL-reduced basis with m1 first
    exponents: tuple  # k_i for the columns after m1

    @property
    def ratios(self) -> np.ndarray:
        n = np.linalg.norm(self.lattice.basis, axis=0)
        return n[1:] / n[0]


def procedure(alg: AlgebraicLattice) -> ProcedureResult:
    """Rescale the LLL-reduced generators by powers of two to lengths in [|m1|, 2|m1|)."""
    B, _ = lll_basis(alg.lattice.basis)
    norms = np.linalg.norm(B, axis=0)
    lo = norms.min()
    tied = np.nonzero(norms <= lo * (1 + 1e-9))[0]
    ones = [j for j in tied if np.allclose(np.abs(B[:, j]), np.abs(B[0, j]), rtol=1e-9)]
    if len(tied) > 1:
        warnings.warn(
            f"{len(tied)} reduced generators share the minimal length; using the first", AmbiguousBasisWarning, stacklevel=2
        )
    first = ones[0] if ones else int(tied[0])
    order = [first] + [j for j in range(B.shape[1]) if j != first]
    B = B[:, order]
    m1 = norms[first]
    ks = []
    cols = [B[:, 0]]
    for j in range(1, B.shape[1]):
        k = math.ceil(math.log2(m1 / np.linalg.norm(B[:, j])) - 1e-12)
        ks.append(k)
        cols.append(2.0**k * B[:, j])
    return ProcedureResult(Lattice(np.column_stack(cols)), B, tuple(ks))


def sublattice_procedure(alg: AlgebraicLattice) -> Lattice:
    """The lattice generated by m1 and 2^k_i m_i (not volume-normalized)."""
    return procedure(alg).lattice


def field_to_json(spec) -> dict:
    if isinstance(spec, Quartic):
        return {"kind": "quartic", "coeffs": list(spec.coeffs), "p": None, "q": None}
    return {"kind": "biquadratic", "coeffs": None, "p": spec.p, "q": spec.q}


def field_from_json(obj) -> object:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "quartic":
        return Quartic(tuple(obj["coeffs"]))
    if kind == "biquadratic":
        return Biquadratic(int(obj["p"]), int(obj["q"]))
    raise DomainError(f"unknown field kind {kind!r}")
