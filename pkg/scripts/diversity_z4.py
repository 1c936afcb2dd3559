"""Best and worst full-diversity quartic lattices against Z^4 over gamma^2."""

from _common import parser, save
from latsec import experiments

if __name__ == "__main__":
    p = parser(__doc__, "diversity_z4.csv")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    t = experiments.diversity_z4(count=args.count, seed=args.seed, workers=args.workers)
    save(t, args.out)
    z, best, worst = (t.column(c) for c in ("ecdp_Z4", "ecdp_best_fd", "ecdp_worst_fd"))
    print(f"max Z4 / best ratio {(z / best).max():.4f}")
    print("gap ratio (worst - best) / (Z4 - best):", " ".join(f"{g:.3f}" for g in (worst - best) / (z - best)))
