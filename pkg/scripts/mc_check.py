"""Monte Carlo average flatness against the closed-form fast-fading bound, over seeds."""

import argparse

import numpy as np

from latsec.algebraic import Biquadratic, embed
from latsec.bounds import CosetCode, RayleighFast, avg_flatness_mc, psi_ff
from latsec.lattice import Lattice
from latsec.theta import TruncationPolicy

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    for name, bob in (("Z4", Lattice(np.eye(4))), ("Biquadratic(2,3)", embed(Biquadratic(2, 3)).lattice)):
        code = CosetCode.nested(bob)
        closed = bob.volume * psi_ff(code.eve, 1.0, TruncationPolicy.adaptive(1e-5)).value
        z = []
        for seed in range(args.seeds):
            est = avg_flatness_mc(code.eve, RayleighFast(1.0), 1.0, args.samples, seed, workers=args.workers)
            z.append(((est.mean + 1) / code.index - closed) / (est.std_error / code.index))
        z = np.array(z)
        print(f"{name}: closed form {closed:.6f}, within 3 SE {np.mean(np.abs(z) <= 3):.0%}, mean z {z.mean():+.2f}")
