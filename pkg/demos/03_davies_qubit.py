"""
A thermal qubit: secular rates and the coherence/population bounds
==================================================================

Build the Davies generator of a sigma_x-coupled qubit with Fermi rates at
beta = ln 3, read off the cross-boundary rates, and follow a coherent initial
state against the closed-form coherence floor and kernel-weight ceiling.
"""

import math

import numpy as np

from boundcert.activation import split_from_levels
from boundcert.certification import pure_coherent_state
from boundcert.davies import build_davies, dynamical_bounds, evolve, fermi_rate, verify_secular

beta = math.log(3)
split = split_from_levels([0], 2)
model, rates = build_davies([0.0, 1.0], [np.array([[0, 1], [1, 0]])], beta, fermi_rate(beta), split)
sec = verify_secular(model)
print(f"mu = {rates.mu:.4f}, eta = {rates.eta:.4f}, k = {rates.k:.4f}, eps_bar = {rates.eps_bar:.4f}")
print(f"Gamma_01 = {sec.gamma_pe[0, 0]:.4f}, omega_01 = {sec.omega_pe[0, 0]:.4f}, "
      f"residual = {sec.max_residual:.1e}")

rho0 = pure_coherent_state(0.1, [1, 0], [0, 1])
times = np.linspace(0, 6, 13)
traj = evolve(model, rho0, times, reference=model.gibbs_state())
b = dynamical_bounds(rates, sec, traj.c[0], traj.eps_Q[0], times)
print("\n  t      c(t)     floor     eps_Q(t)  ceiling   D(rho_t||gibbs)")
for i, t in enumerate(times):
    print(f"{t:4.1f}  {traj.c[i]:.5f}  {b.c_lower[i]:.5f}  {traj.eps_Q[i]:.5f}  "
          f"{b.epsQ_upper[i]:.5f}  {traj.rel_entropy[i]:.3e}")
