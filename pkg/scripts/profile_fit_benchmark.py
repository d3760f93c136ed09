"""How many Nelder-Mead polishing starts the profile fit needs per family.

For each family, fits jittered noiseless and Poisson-noisy signatures and
counts fits whose likelihood falls short of the likelihood at the true
parameters (a sign of a local optimum).
"""
import argparse
import time

import numpy as np

from mlrss.profiles import Family, FitOptions, OutbreakSignature, ProfileShape, fit_theta, signature_loglik
from mlrss.simulator import CENTRAL_THETA, jitter_shape, poisson_draws


def signatures(family, noisy, n, lam0):
    rng = np.random.default_rng([0, int(noisy)])
    central = ProfileShape(family, CENTRAL_THETA[family])
    for i in range(n):
        true = jitter_shape(central, rng)
        d = true.curve(np.arange(1, 400))
        days = np.arange(50, 50 + int(np.nonzero(d > 0.05 * d.max())[0][-1]) + 3)
        lam = lam0 * (1 + 0.2 * np.sin(days / 5))
        mean = lam + true.curve(days - 49)
        counts = poisson_draws(mean, 100 + i) if noisy else np.round(mean)
        yield true, OutbreakSignature(counts, lam, 50, days)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", default="lognormal,gaussian,bimodal")
    ap.add_argument("--polish", default="2,4,10")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--lam", type=float, default=40.0)
    args = ap.parse_args()
    for fam in map(Family, args.families.split(",")):
        for k in map(int, args.polish.split(",")):
            for noisy in (False, True):
                t0 = time.perf_counter()
                short, rmse = 0, []
                for true, sig in signatures(fam, noisy, args.n, args.lam):
                    fit = fit_theta(sig, fam, FitOptions(n_polish=k))
                    short += signature_loglik(sig, fit) < signature_loglik(sig, true) - 1e-6
                    d = true.curve(sig.u)
                    rmse.append(np.sqrt(np.mean((fit.curve(sig.u) - d) ** 2)) / d.max())
                print(f"{fam.value:9s} polish={k:2d} {'noisy' if noisy else 'clean'}: below truth {short}/{args.n}, "
                      f"median rmse {np.median(rmse):.3f}, worst {max(rmse):.3f}, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
