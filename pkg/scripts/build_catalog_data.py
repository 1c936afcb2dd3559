"""Regenerate src/latsec/data/lattices.json.

The Leech basis is derived from the extended Golay code: the integer vectors
2c (c in a Golay basis), 4(e_0 + e_i), 8 e_0 and (-3, 1, ..., 1) generate
sqrt(8) times the Leech lattice. A Hermite normal form turns that generating
set into a basis, which is then LLL-reduced for faster enumeration.
"""

import json
from pathlib import Path

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from latsec.lattice import lll_basis

GOLAY_A = [
    [1, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1],
    [0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1, 0],
    [0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1],
    [1, 0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0],
    [1, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1],
    [1, 1, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0],
    [1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 1],
    [1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0],
    [0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 1],
    [0, 0, 1, 1, 1, 1, 1, 0, 0, 1, 1, 0],
    [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 1, 1],
    [1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 1],
]

# E8 in the even coordinate system, columns times 2
E8_TIMES_2 = [
    [4, -2, 0, 0, 0, 0, 0, 1],
    [0, 2, -2, 0, 0, 0, 0, 1],
    [0, 0, 2, -2, 0, 0, 0, 1],
    [0, 0, 0, 2, -2, 0, 0, 1],
    [0, 0, 0, 0, 2, -2, 0, 1],
    [0, 0, 0, 0, 0, 2, -2, 1],
    [0, 0, 0, 0, 0, 0, 2, 1],
    [0, 0, 0, 0, 0, 0, 0, 1],
]

E6_CARTAN = [
    [2, -1, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0],
    [0, -1, 2, -1, 0, -1],
    [0, 0, -1, 2, -1, 0],
    [0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 2],
]

D4_CARTAN = [
    [2, -1, 0, 0],
    [-1, 2, -1, -1],
    [0, -1, 2, 0],
    [0, -1, 0, 2],
]


def golay_generator():
    return np.hstack([np.eye(12, dtype=int), np.array(GOLAY_A)])


def leech_generators():
    rows = [2 * c for c in golay_generator()]
    for i in range(1, 24):
        v = np.zeros(24, dtype=int)
        v[0] = v[i] = 4
        rows.append(v)
    v = np.zeros(24, dtype=int)
    v[0] = 8
    rows.append(v)
    rows.append(np.array([-3] + [1] * 23))
    return np.array(rows, dtype=int)


def leech_basis_sqrt8():
    gens = Matrix(leech_generators().T)  # columns generate
    H = np.array(hermite_normal_form(gens), dtype=np.int64)
    H = H[:, np.any(H != 0, axis=0)]
    assert H.shape == (24, 24)
    assert round(abs(np.linalg.det(H.astype(float)))) == 8**12
    B, U = lll_basis(H.astype(float))
    B = H @ U
    assert np.array_equal(B, np.round(B))
    return B.astype(int)


def main():
    data = {
        "_provenance": (
            "E8: even coordinate system (D8 plus the all-halves glue vector), stored times 2. "
            "E6, D4: Cartan matrices used as Gram matrices. "
            "Golay: generator [I | A] of the extended binary Golay code with the A block from the "
            "common circulant presentation (weight distribution 1, 759, 2576, 759, 1). "
            "Leech: sqrt(8) times Leech, Hermite normal form of the Golay construction "
            "generators followed by LLL; regenerate with scripts/build_catalog_data.py."
        ),
        "golay_a": GOLAY_A,
        "e8_basis_times_2": E8_TIMES_2,
        "e6_gram": E6_CARTAN,
        "d4_gram": D4_CARTAN,
        "leech_basis_times_sqrt8": leech_basis_sqrt8().tolist(),
    }
    out = Path(__file__).resolve().parents[1] / "src" / "latsec" / "data" / "lattices.json"
    out.write_text(json.dumps(data, separators=(",", ":")) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
