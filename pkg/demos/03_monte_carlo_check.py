"""Sample a distribution and check 1 - c_beta >= psi(p, q) empirically."""
import numpy as np

from topodense import GaussianMixture, ReferenceSet, Ring, monte_carlo_theorem1

cases = {
    "two blobs": GaussianMixture([0.5, 0.5], [[-2, 0], [2, 0]], [0.6, 0.6]),
    "ring": Ring(radius=2.0, width=0.2),
}
ref = {"two blobs": ReferenceSet(np.array([[-2.0, 0.0]]), radius=0.8),
       "ring": ReferenceSet(np.array([[2.0, 0.0]]), radius=0.8)}

for name, dist in cases.items():
    for b in (4, 8):
        rep = monte_carlo_theorem1(dist, ref[name], b=b, l=1, beta=2.0, seed=1)
        print(
            f"{name:9s} b={b}: c_hat={rep.c_beta_hat:.4f} p={rep.p_hat:.3f} q={rep.q_hat:.3f} "
            f"psi={rep.psi_value:.4f} slack={rep.slack:+.4f} (3 sigma = {3 * rep.sigma:.4f})"
        )
