"""
Probe states and their photon statistics
========================================

Builds each probe family in a certified Fock cutoff, tunes a few of them to
the same mean photon number, and prints the moments that set their purified
Fisher information.
"""
import numpy as np

from dephasim import probes
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec

# a handful of probes at their textbook parameters
specs = [
    ProbeSpec(Family.Coherent, alpha=1.0),
    ProbeSpec(Family.Cat, alpha=1.0),
    ProbeSpec(Family.Kitten, alpha=1.0),
    ProbeSpec(Family.SqueezedVacuum, r=0.5),
    ProbeSpec(Family.SSKitten, alpha=1.0, r=0.5),
    ProbeSpec(Family.CbPhS, gamma=0.3),
    ProbeSpec(Family.ModSSW),
]
print(f"{'family':>15} {'dim':>5} {'<n>':>9} {'<n^2>':>9} {'Q':>8}")
for spec in specs:
    # smallest cutoff whose tail and moments are converged
    dim = probes.adaptive_dim(spec, max_dim=800)
    s = probes.photon_stats(probes.build_probe(FockSpace(dim), spec))
    print(f"{spec.family.value:>15} {dim:5d} {s.mean_n:9.5f} {s.mean_n2:9.5f} {s.agarwal_q:8.4f}")

# compass states only populate every fourth Fock level
psi = probes.build_probe(FockSpace(24), ProbeSpec(Family.Kitten, alpha=1.2))
print("\nKitten support:", np.nonzero(np.abs(psi) > 1e-12)[0])

# matched energy: solve each family's free parameter for <n> = 0.7
print("\nat <n> = 0.7")
for template in (ProbeSpec(Family.SSKitten, r=0.5), ProbeSpec(Family.SqCat, r=0.5),
                 ProbeSpec(Family.SS), ProbeSpec(Family.CbPhS)):
    spec = probes.solve_param_for_mean_n(template, 0.7, max_dim=2048)
    dim = probes.adaptive_dim(spec, max_dim=2048)
    s = probes.photon_stats(probes.build_probe(FockSpace(dim), spec))
    print(f"{spec.family.value:>15}: alpha={abs(spec.alpha):.4f} r={spec.r:.4f} "
          f"gamma={spec.gamma:.4f} -> <n^2> = {s.mean_n2:.5f} (dim {dim})")
