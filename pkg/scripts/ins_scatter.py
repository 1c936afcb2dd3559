"""Inverse norm sum against fading ECDP bound, before and after the sublattice procedure."""

import numpy as np

from _common import parser, save
from latsec import experiments

if __name__ == "__main__":
    p = parser(__doc__, "ins_scatter.csv")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    t = experiments.ins_scatter(count=args.count, seed=args.seed, workers=args.workers)
    save(t, args.out)
    med = np.median(t.column("ins_raw"))
    print(f"median INS raw {med:.4g}, procedure {np.median(t.column('ins_sub')):.4g}")
    print(f"procedure rows with INS above the raw median: {(t.column('ins_sub') > med).mean():.0%}")
