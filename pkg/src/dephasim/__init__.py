"""Single-mode bosonic dephasing channel in truncated Fock space, with quantum
Fisher information for estimating the dephasing strength."""

__version__ = "0.1.0"

from . import channel, fock, phase_space, probes, purification, qfi  # noqa: E402
from .channel import ChannelParam, dephase  # noqa: E402
from .fock import FockSpace, Tolerances  # noqa: E402
from .phase_space import PhaseSpaceGrid, WignerField  # noqa: E402
from .probes import Family, PhotonStats, ProbeSpec, build_probe, photon_stats  # noqa: E402
from .purification import OptomechParams, lambda_param  # noqa: E402
from .qfi import QfiResult, compute_qfi, qfi_bures, qfi_sld  # noqa: E402
