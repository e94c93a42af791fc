"""
Explicit coherence bound versus a recoverability remainder
==========================================================

Near the boundary the explicit bound c log(a0/eps_Q) beats the remainder
-2 log F(rho, R(Pi rho)) from Petz recovery, and the gap grows without bound
as the kernel weight goes to zero.  A multi-sector version is shown first.
"""

import numpy as np

from boundcert.activation import split_from_levels
from boundcert.harness.sampling import (geometric_hierarchy_state, random_block_sigma,
                                        random_sector_sigma, sample_regime_state)
from boundcert.separation import fr_compare, multi_sector_bound, sequential_pinch_chain

rng = np.random.default_rng(8)
sizes = [2, 1, 1]
rho, Ps = geometric_hierarchy_state(sizes, rng)
chain = sequential_pinch_chain(rho, Ps)
ms = multi_sector_bound(rho, random_sector_sigma(sizes, rng), chain)
print(f"sectors {sizes}: D = {ms.d_total:.6f} >= bound {ms.bound:.6f} (applicable: {ms.applicable})")

split = split_from_levels([0, 1], 4)
a0 = 0.4
base = sample_regime_state(split, a0, 0.2, rng)
sigma = random_block_sigma(split, rng)
print("\n  eps_Q      ours        remainder    ratio    in class")
for s in np.geomspace(1.0, 1e-10, 11):
    D = np.diag([1.0, 1.0, np.sqrt(s), np.sqrt(s)])
    r = D @ base @ D
    r /= np.trace(r).real
    rep = fr_compare(r, sigma, split, a0)
    print(f"{rep.eps_Q:9.2e}  {rep.ours:10.3e}  {rep.fr_remainder:10.3e}  {rep.ratio:7.3f}  {rep.in_class}")
