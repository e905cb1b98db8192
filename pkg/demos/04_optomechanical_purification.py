"""
Dephasing from an optomechanical interaction
============================================

A cavity coupled to a mechanical oscillator picks up photon-number dependent
displacements of the mechanics. Tracing the mechanics out reproduces the
dephasing channel with kappa t = |lambda|^2.
"""
import numpy as np

from dephasim import channel, fock, purification as pur
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec, build_probe

p = pur.OptomechParams(g=0.3, omega_m=1.0, omega_c=1.0, t=1.0)
lam = pur.lambda_param(p)
print(f"lambda = {lam.value:.6f}, |lambda|^2 = {lam.kappa_t:.6f}")

psi = build_probe(FockSpace(16), ProbeSpec(Family.Coherent, alpha=1.0))
dim_m = pur.mechanical_dim(psi, p)
two = pur.optomech_evolve(psi, p, dim_m)

# the closed form against a dense matrix exponential of the Hamiltonian
ref = pur.optomech_evolve_expm(psi, p, dim_m)
print(f"state fidelity with exp(-iHt): {abs(np.vdot(ref, two)) ** 2:.15f} ({16}x{dim_m})")

# trace out the mechanics
rho_c = pur.reduced_cavity_state(two, (16, dim_m))
target = channel.apply_closed_form(fock.to_density(psi), lam.kappa_t)
print("max modulus discrepancy:", np.max(np.abs(np.abs(rho_c) - np.abs(target))))

# the two-mode generator variance is (t j0)^2 <n^2>
print("generator variance:", pur.generator_variance(psi, p), pur.generator_variance_direct(psi, p))
print("QCRB for |lambda|:", pur.qcrb(psi, p), " for g:", pur.qcrb(psi, p, target="g"))

# at a mechanical revival the cavity decouples and no information about g remains
revival = pur.OptomechParams(g=0.3, omega_m=1.0, t=2 * np.pi)
print("|lambda| at revival:", pur.lambda_param(revival).abs_lambda)
