"""Exact and Monte Carlo Gowers norms on a non-abelian group."""

import numpy as np

from cubelab.gowers import compare_distributions, gowers_norm, gowers_norm_mc, random_function
from cubelab.groups import cyclic, symmetric

S3 = symmetric(3)
f = random_function(S3, np.random.default_rng(0))
for n in (1, 2, 3):
    print(f"||f||_U{n} = {gowers_norm(f, n):.6f}")

g = random_function(cyclic(5), np.random.default_rng(1))
exact = gowers_norm(g, 2)
mc = gowers_norm_mc(g, 2, 20000, seed=7)
print(f"Z5: exact {exact:.6f}, MC {mc.estimate:.6f} (stderr {mc.stderr:.2e})")

print("simple vs general 2-cube distributions on S3 (equal, TV):", compare_distributions(S3, 2))
