"""
How much entropy does leaking off the support cost?
===================================================

Regularize a rank-deficient state, sample states that sit close to its
support, and compare the relative entropy with the explicit coherence bound
c log(a0 / eps_Q) and its weaker square-root form.
"""

import math

import numpy as np

from boundcert.activation import activation, bkm_coercivity, local_constants, regularize
from boundcert.entropy import coherence_entropy, relative_entropy
from boundcert.harness.sampling import random_split, sample_regime_state

rng = np.random.default_rng(3)
split = random_split(5, rng, r=2)
# maximally mixed on the support
reg = regularize(split.P / split.r, 0.05)
a0 = local_constants(reg, split).a0
print(f"support rank {split.r}, kernel dimension {split.d_Q}, a0 = {a0:.4f}")

print("\n  eps_Q        c         D(rho||s_eps)  D(rho||Pi rho)  c log(a0/eps_Q)  weak form")
for eps_max in [a0 / 2, 1e-2, 1e-4, 1e-6]:
    rho = sample_regime_state(split, a0, eps_max, rng)
    rep = activation(rho, split)
    coer = bkm_coercivity(rho, split, a0)
    weak = 2 * rep.c * math.log(math.sqrt(a0) / rep.A_func)
    print(f"{rep.eps_Q:9.2e}  {rep.c:9.2e}  {relative_entropy(rho, reg.sigma_eps):13.6e}"
          f"  {coherence_entropy(rho, split.pinching()):14.6e}  {coer.bound:15.6e}  {weak:10.3e}")
