"""AWGN ECDP bounds of the 24-dimensional coset codes (index 2^24) over SNR."""

import numpy as np

from _common import parser, save
from latsec import experiments

if __name__ == "__main__":
    args = parser(__doc__, "fig2.csv").parse_args()
    t = experiments.fig2(workers=args.workers)
    save(t, args.out)
    cols = ["Leech", "E8x3", "E6x4", "Z24"]
    print("low-SNR value times 2^24:", ", ".join(f"{c}={t.column('ecdp_' + c)[0] * 2**24:.6f}" for c in cols))
    others = np.min([t.column(f"ecdp_{c}") for c in cols[1:]], axis=0)
    print("Leech pointwise minimal:", bool(np.all(t.column("ecdp_Leech") <= others * (1 + 1e-12))))
