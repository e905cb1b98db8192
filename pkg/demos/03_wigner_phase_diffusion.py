"""
Wigner functions and angular diffusion
======================================

Evaluates Wigner functions on a polar grid, follows the angular marginal as
dephasing washes out phase information, and checks the diffusion equation
d W / d(kappa t) = (1/2) d^2 W / d theta^2.
"""
from dephasim import channel, fock, phase_space as ps
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec, build_probe

probes_ = [ProbeSpec(Family.Coherent, alpha=2.0), ProbeSpec(Family.SqueezedVacuum, r=0.8),
           ProbeSpec(Family.Cat, alpha=2.0)]

for spec in probes_:
    rho0 = fock.to_density(build_probe(FockSpace(48), spec))
    grid = ps.default_grid(rho0)
    print(f"\n{spec.family.value}: grid r_max={grid.r_max:.2f}, {grid.n_radial}x{grid.n_angular}")
    for kt in (0.05, 0.1, 1.0):
        field = ps.wigner_grid(channel.apply_closed_form(rho0, kt), grid)
        marg = ps.angular_marginal(field)
        print(f"  kappa t={kt:<5} norm={field.normalization():.9f} min W={field.values.min():+.4f} "
              f"uniformity={ps.uniformity(marg):.5f} circ.var={ps.circular_variance(marg):.4f}")

# the parity-trace formula against the independent Weyl integral
rho = fock.to_density(build_probe(FockSpace(30), ProbeSpec(Family.Cat, alpha=1.5)))
beta = 0.4 - 0.7j
print("\nW(beta) parity trace:", ps.wigner_point(rho, beta), " Weyl integral:", ps.wigner_weyl(rho, beta))

# diffusion residual is second order in the time step
rho = fock.to_density(build_probe(FockSpace(30), ProbeSpec(Family.Coherent, alpha=1.0)))
for dt in (2e-3, 1e-3, 5e-4):
    print(f"dt={dt}: relative residual {ps.diffusion_residual(rho, 0.1, dt=dt):.2e}")
