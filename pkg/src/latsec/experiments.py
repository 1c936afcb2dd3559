"""Figure and scatter computations shared by the CLI and scripts/.

Every function returns a Table: a header, data rows and optional footer
rows, all deterministic functions of their arguments.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from . import catalog
from .algebraic import embed, procedure, random_totally_real_quartic
from .bounds import PSI_POLICY, CosetCode, ecdp_awgn, ins, psi_ff
from .errors import GenerationFailedError, NumericError
from .lattice import Lattice, scale, unit_volume
from .theta import DEFAULT_POLICY, TruncationPolicy

FIG1_LATTICES = (("Z8", "Z8"), ("L", "L"), ("E8", "E8"), ("A8star", "A8*"))
FIG2_LATTICES = (("Z24", "Z24"), ("Leech", "Leech"), ("E8x3", "E8^3"), ("E6x4", "E6^4"))


@dataclass
class Table:
    header: list
    rows: list
    footer: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows + self.footer:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def column(self, name) -> np.ndarray:
        j = self.header.index(name)
        return np.array([r[j] for r in self.rows], dtype=float)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if not math.isfinite(x):
        raise NumericError(f"refusing to write non-finite value {x}")
    return "%.12g" % x


def sigma_from_snr(snr_db: float) -> float:
    """snr_db = 10 log10(sigma^-2)."""
    return 10.0 ** (-snr_db / 20.0)


def snr_grid(start: float = -20.0, stop: float = 20.0, num: int = 41) -> np.ndarray:
    return np.linspace(start, stop, num)


def _pmap(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- AWGN figures


def awgn_curves(codes, grid, policy=DEFAULT_POLICY, workers=1) -> Table:
    """ECDP bound of each (column name, code) over an SNR grid."""
    names = [n for n, _ in codes]

    def row(snr):
        s = sigma_from_snr(snr)
        return [float(snr)] + [ecdp_awgn(c, s, policy).value for _, c in codes]

    return Table(["snr_db"] + [f"ecdp_{n}" for n in names], _pmap(row, list(grid), workers))


def fig1_codes():
    """eve = unit-volume lattice, bob = eve / 2, index 2^8."""
    return [(col, CosetCode.from_eve(catalog.make(name, unit=True))) for col, name in FIG1_LATTICES]


def fig2_codes():
    """bob = unit-volume lattice, eve = 2 bob, index 2^24."""
    return [(col, CosetCode.nested(catalog.make(name, unit=True))) for col, name in FIG2_LATTICES]


def fig1(grid=None, policy=DEFAULT_POLICY, workers=1) -> Table:
    return awgn_curves(fig1_codes(), snr_grid() if grid is None else grid, policy, workers)


def fig2(grid=None, policy=DEFAULT_POLICY, workers=1) -> Table:
    return awgn_curves(fig2_codes(), snr_grid() if grid is None else grid, policy, workers)


# ---------------------------------------------------------------- field populations


def field_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1)[0])


def quartic_population(count: int, seed: int, coeff_bound: int = 10):
    """`count` accepted fields; failed draws are skipped and replaced by later ones."""
    out, i = [], 0
    while len(out) < count:
        if i > 10 * count + 100:
            raise GenerationFailedError(f"only {len(out)} of {count} fields generated")
        try:
            out.append(random_totally_real_quartic(field_seed(seed, i), coeff_bound))
        except GenerationFailedError:
            pass
        i += 1
    return out


def fading_ecdp(bob: Lattice, gamma: float, policy=PSI_POLICY) -> float:
    """Fast-fading ECDP bound of the code bob ⊃ 2 bob at gamma = sigma_h / sigma."""
    return bob.volume * psi_ff(scale(bob, 2.0), gamma, policy).value


@dataclass(frozen=True)
class FieldRecord:
    coeffs: tuple
    disc_proxy: float
    raw: Lattice  # unit volume
    sub: Lattice  # unit-volume sublattice-procedure output
    exponents: tuple
    ratios: tuple


def field_records(count, seed, coeff_bound=10, workers=1):
    def rec(spec):
        a = embed(spec)
        pr = procedure(a)
        return FieldRecord(spec.coeffs, a.disc_proxy, a.lattice, unit_volume(pr.lattice), pr.exponents, tuple(pr.ratios))

    return _pmap(rec, quartic_population(count, seed, coeff_bound), workers)


def _coeff_str(c):
    return " ".join(str(v) for v in c)


def disc_scatter(count=50, seed=0, gamma_sqs=(1.0, 2.0), policy=PSI_POLICY, workers=1) -> Table:
    """ECDP against the discriminant proxy, before and after the sublattice procedure."""
    recs = field_records(count, seed, workers=workers)
    header = ["field", "coeffs", "disc_proxy", "sqrt_disc"]
    for g2 in gamma_sqs:
        header += [f"ecdp_raw_g{g2:g}", f"ecdp_sub_g{g2:g}"]

    def row(item):
        i, r = item
        out = [i, _coeff_str(r.coeffs), r.disc_proxy, math.sqrt(r.disc_proxy)]
        for g2 in gamma_sqs:
            g = math.sqrt(g2)
            out += [fading_ecdp(r.raw, g, policy), fading_ecdp(r.sub, g, policy)]
        return out

    rows = _pmap(row, list(enumerate(recs)), workers)
    disc = [r[3] for r in rows]
    foot = ["spearman", "", "", ""]
    for j in range(4, len(header)):
        foot.append(float(spearmanr(disc, [r[j] for r in rows]).statistic) if len(rows) > 2 else 0.0)
    return Table(header, rows, [foot])


def ins_scatter(count=50, seed=0, gamma_sq=3.5, policy=PSI_POLICY, workers=1) -> Table:
    """Inverse norm sum of eve against the ECDP bound, before and after the procedure."""
    recs = field_records(count, seed, workers=workers)
    g = math.sqrt(gamma_sq)

    def row(item):
        i, r = item
        return [
            i,
            _coeff_str(r.coeffs),
            ins(scale(r.raw, 2.0), policy=policy),
            fading_ecdp(r.raw, g, policy),
            ins(scale(r.sub, 2.0), policy=policy),
            fading_ecdp(r.sub, g, policy),
        ]

    rows = _pmap(row, list(enumerate(recs)), workers)
    header = ["field", "coeffs", "ins_raw", "ecdp_raw", "ins_sub", "ecdp_sub"]
    foot = ["spearman", ""]
    for a, b in ((2, 3), (4, 5)):
        x, y = [r[a] for r in rows], [r[b] for r in rows]
        foot += [float(spearmanr(x, y).statistic) if len(rows) > 2 else 0.0, ""]
    return Table(header, rows, [foot])


def gamma_sq_grid(start=0.25, stop=4.0, num=16) -> np.ndarray:
    return np.linspace(start, stop, num)


def diversity_z4(grid=None, count=50, seed=0, policy=PSI_POLICY, workers=1) -> Table:
    """Z^4 against the envelope of sublattice-procedure lattices over sigma_h^2 / sigma^2."""
    grid = gamma_sq_grid() if grid is None else grid
    recs = field_records(count, seed, workers=workers)
    z4 = catalog.make("Z4")

    def row(g2):
        g = math.sqrt(g2)
        fd = [fading_ecdp(r.sub, g, policy) for r in recs]
        return [float(g2), fading_ecdp(z4, g, policy), min(fd), max(fd)]

    return Table(["gamma_sq", "ecdp_Z4", "ecdp_best_fd", "ecdp_worst_fd"], _pmap(row, list(grid), workers))
