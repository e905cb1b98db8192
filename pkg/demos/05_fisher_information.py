"""
Quantum Fisher information for the dephasing strength
=====================================================

Computes the QFI about |lambda| (kappa t = |lambda|^2) from the symmetric
logarithmic derivative and, independently, from the Bures metric, then
compares both with the purification references <n^2> and 4 <n^2>.
"""
import warnings

from dephasim import channel, fock, probes, qfi
from dephasim.errors import TruncationWarning
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec

warnings.simplefilter("ignore", TruncationWarning)

for template in (ProbeSpec(Family.Coherent, alpha=1.0), ProbeSpec(Family.Cat, alpha=1.0),
                 ProbeSpec(Family.SSKitten, alpha=1.0, r=0.5), ProbeSpec(Family.SqueezedVacuum)):
    spec = probes.solve_param_for_mean_n(template, 1.0, dim=48)
    rho0 = fock.to_density(probes.build_probe(FockSpace(48), spec))
    print(f"\n{spec.family.value} at <n> = 1")
    for lam in (0.1, 0.5, 1.0, 2.0):
        r = qfi.compute_qfi(rho0, lam)
        print(f"  |lambda|={lam:<4} SLD={r.qfi_sld:9.5f} Bures={r.qfi_bures:9.5f} "
              f"<n^2>={r.purified_bound:7.4f} 4<n^2>={r.standard_bound:7.4f}")

# Fock states are invariant under dephasing and carry no information
rho = fock.to_density(FockSpace(6).basis(3))
print("\nFock |3>: QFI =", qfi.qfi_sld(rho, 0.7))

# a concrete measurement: x^2 on a dephased cat, against the QFI bound for kappa t
cat = fock.to_density(probes.build_probe(FockSpace(30), ProbeSpec(Family.Cat, alpha=1.0)))
x = FockSpace(30).x
delta = qfi.sensitivity(lambda k: channel.apply_closed_form(cat, k), x @ x, 0.3)
print(f"x^2 measurement: delta kappa t = {delta:.4f}, QCRB = {qfi.qfi_kappa(cat, 0.3) ** -0.5:.4f}")
