"""AWGN ECDP bounds of the 8-dimensional coset codes (index 2^8) over SNR."""

import numpy as np

from _common import parser, save
from latsec import experiments

if __name__ == "__main__":
    args = parser(__doc__, "fig1.csv").parse_args()
    t = experiments.fig1(workers=args.workers)
    save(t, args.out)
    cols = ["E8", "A8star", "Z8", "L"]
    low = {c: t.column(f"ecdp_{c}")[0] * 2**8 for c in cols}
    print("low-SNR value times 2^8:", ", ".join(f"{c}={v:.6f}" for c, v in low.items()))
    ordered = all(np.all(t.column(f"ecdp_{a}") <= t.column(f"ecdp_{b}") * (1 + 1e-12)) for a, b in zip(cols, cols[1:]))
    print("pointwise E8 <= A8* <= Z8 <= L:", ordered)
