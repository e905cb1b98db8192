"""Quantum Fisher information of the dephasing channel output.

The estimated parameter is |lambda| with kappa t = |lambda|^2, so that

    rho_nm(|lambda|) = exp(-|lambda|^2 (n - m)^2 / 2) rho_nm(0).

Two independent routes are provided: the symmetric logarithmic derivative
(SLD) in the eigenbasis of rho, and finite differences of the Uhlmann
fidelity (Bures metric) with Richardson extrapolation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import channel
from .errors import DegenerateSpectrum, NumericalFailure, StepTooLarge, ZeroSlope
from .probes import photon_stats

EIG_FLOOR = 1e-12


def _dn2(dim: int) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    return (n[:, None] - n[None, :]) ** 2


def dephased(rho0: np.ndarray, abs_lambda: float) -> np.ndarray:
    return channel.apply_closed_form(rho0, abs_lambda ** 2)


def drho_dlambda(rho0: np.ndarray, abs_lambda: float) -> np.ndarray:
    """d rho / d|lambda| = -|lambda| (n - m)^2 rho_nm(|lambda|)."""
    if abs_lambda < 0:
        raise ValueError("abs_lambda must be >= 0")
    return -abs_lambda * _dn2(rho0.shape[0]) * dephased(rho0, abs_lambda)


def drho_dkappa(rho0: np.ndarray, kappa_t: float) -> np.ndarray:
    """d rho / d(kappa t) = -(n - m)^2 / 2 rho_nm(kappa t)."""
    return -0.5 * _dn2(rho0.shape[0]) * channel.apply_closed_form(rho0, kappa_t)


@dataclass
class SldResult:
    operator: np.ndarray
    qfi: float
    residual: float
    discarded_weight: float
    eig_floor: float


def sld(rho: np.ndarray, drho: np.ndarray, eig_floor: float = EIG_FLOOR) -> SldResult:
    """Symmetric logarithmic derivative L solving rho L + L rho = 2 drho.

    Works in the eigenbasis {p_k, |k>} of rho: L_kl = 2 D_kl / (p_k + p_l)
    with D = V^dag drho V; pairs with p_k + p_l <= eig_floor Tr rho are set
    to zero. The QFI is Tr[rho L^2] = sum_kl 2 |D_kl|^2 / (p_k + p_l).
    ``discarded_weight`` is max |D_kl| over the dropped pairs and
    ``residual`` is the max defect of the defining equation on the retained
    pairs.
    """
    herm = 0.5 * (rho + rho.conj().T)
    p, v = np.linalg.eigh(herm)
    d = v.conj().T @ drho @ v
    s = p[:, None] + p[None, :]
    keep = s > eig_floor * np.trace(herm).real
    lk = np.zeros_like(d)
    lk[keep] = 2 * d[keep] / s[keep]
    dropped = float(np.max(np.abs(d[~keep]))) if np.any(~keep) else 0.0
    if dropped > 1e-6:
        warnings.warn(f"SLD drops terms of weight {dropped:.3e} below the eigenvalue floor",
                      DegenerateSpectrum, stacklevel=2)
    op = v @ lk @ v.conj().T
    op = 0.5 * (op + op.conj().T)
    back = v.conj().T @ (herm @ op + op @ herm - 2 * drho) @ v
    residual = float(np.max(np.abs(back[keep]))) if np.any(keep) else 0.0
    qfi = float(np.sum(2 * np.abs(d[keep]) ** 2 / s[keep]))
    return SldResult(op, qfi, residual, dropped, eig_floor)


def sld_operator(rho: np.ndarray, drho: np.ndarray, eig_floor: float = EIG_FLOOR) -> np.ndarray:
    return sld(rho, drho, eig_floor).operator


def sld_residual(rho: np.ndarray, op: np.ndarray, drho: np.ndarray) -> float:
    """max |rho L + L rho - 2 drho| in the Fock basis."""
    return float(np.max(np.abs(rho @ op + op @ rho - 2 * drho)))


def qfi_sld(rho0: np.ndarray, abs_lambda: float, eig_floor: float = EIG_FLOOR) -> float:
    """F_Q = Tr[rho L^2] for |lambda| at the channel output."""
    return sld(dephased(rho0, abs_lambda), drho_dlambda(rho0, abs_lambda), eig_floor).qfi


def qfi_kappa(rho0: np.ndarray, kappa_t: float, eig_floor: float = EIG_FLOOR) -> float:
    """F_Q for kappa t, from d rho / d(kappa t) directly."""
    rho = channel.apply_closed_form(rho0, kappa_t)
    return sld(rho, drho_dkappa(rho0, kappa_t), eig_floor).qfi


def _sqrtm_psd(rho: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w[0] < -tol * max(1.0, w[-1]):
        raise NumericalFailure(f"state has eigenvalue {w[0]:.3e}; not positive semidefinite")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(rho1: np.ndarray, rho2: np.ndarray, *, tol: float = 1e-8) -> float:
    """Square-root fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)).

    Evaluated as the nuclear norm of sqrt(rho1) sqrt(rho2), which is symmetric
    in its arguments and avoids a second matrix square root.

    Raises
    ------
    NumericalFailure
        If either input has an eigenvalue below -tol.
    """
    a = _sqrtm_psd(rho1, tol)
    b = _sqrtm_psd(rho2, tol)
    return float(np.sum(np.linalg.svd(a @ b, compute_uv=False)))


def default_step(abs_lambda: float) -> float:
    return max(1e-3, 1e-2 * abs_lambda)


def bures_estimate(rho0: np.ndarray, abs_lambda: float, step: float) -> float:
    """8 (1 - F(rho_{l-s}, rho_{l+s})) / (2 s)^2."""
    lo = dephased(rho0, abs_lambda - step)
    hi = dephased(rho0, abs_lambda + step)
    return 8.0 * (1.0 - uhlmann_fidelity(lo, hi)) / (2 * step) ** 2


def _richardson(rho0, abs_lambda, step, rtol, atol):
    coarse = bures_estimate(rho0, abs_lambda, step)
    fine = bures_estimate(rho0, abs_lambda, 0.5 * step)
    ok = abs(coarse - fine) <= rtol * abs(fine) + atol
    return (4 * fine - coarse) / 3, ok, coarse, fine


def qfi_bures_step(rho0: np.ndarray, abs_lambda: float, step: float | None = None, *,
                   rtol: float = 1e-3, atol: float = 1e-8, halvings: int = 4) -> tuple[float, float]:
    """Bures QFI and the step actually used.

    An explicit ``step`` is used as given. Without one, the default step is
    halved up to ``halvings`` times until the Richardson pair agrees.

    Raises
    ------
    StepTooLarge
        If the estimates at s and s/2 disagree by more than ``rtol`` relative
        (plus ``atol`` absolute) for every step tried.
    """
    tries = [step] if step is not None else [default_step(abs_lambda) / 2 ** k
                                             for k in range(halvings + 1)]
    for s in tries:
        if s <= 0:
            raise ValueError("step must be positive")
        if abs_lambda - s < 0:
            raise ValueError(f"|lambda| - step = {abs_lambda - s:.3g} < 0")
        val, ok, coarse, fine = _richardson(rho0, abs_lambda, s, rtol, atol)
        if ok:
            return val, s
    raise StepTooLarge(f"step {s:g}: estimates {coarse:.9g} vs {fine:.9g}")


def qfi_bures(rho0: np.ndarray, abs_lambda: float, step: float | None = None, *,
              rtol: float = 1e-3, atol: float = 1e-8) -> float:
    """QFI from the Bures metric, Richardson-extrapolated over steps s, s/2.

    Raises
    ------
    StepTooLarge
        See :func:`qfi_bures_step`.
    """
    return qfi_bures_step(rho0, abs_lambda, step, rtol=rtol, atol=atol)[0]


def sensitivity(rho_fn: Callable[[float], np.ndarray], observable: np.ndarray,
                kappa_t: float, step: float = 1e-4) -> float:
    """Error-propagation uncertainty delta kappa = Delta f / |d<f>/d kappa|
    for a single measurement of ``observable``.

    Raises
    ------
    ZeroSlope
        If |d<f>/d kappa| < 1e-14.
    """
    if np.max(np.abs(observable - observable.conj().T)) > 1e-12:
        raise ValueError("observable must be Hermitian")
    lo = max(kappa_t - step, 0.0)
    hi = kappa_t + step
    slope = (np.trace(rho_fn(hi) @ observable).real
             - np.trace(rho_fn(lo) @ observable).real) / (hi - lo)
    if abs(slope) < 1e-14:
        raise ZeroSlope(f"<f> is insensitive to kappa t (slope {slope:.3e})")
    rho = rho_fn(kappa_t)
    mean = np.trace(rho @ observable).real
    var = np.trace(rho @ observable @ observable).real - mean ** 2
    return math.sqrt(max(var, 0.0)) / abs(slope)


@dataclass
class QfiResult:
    param_value: float
    qfi_sld: float
    qfi_bures: float
    purified_bound: float
    standard_bound: float
    eig_floor: float
    fd_step: float
    sld_residual: float
    discarded_weight: float

    @property
    def exceeds_purified_bound(self) -> bool:
        """True when qfi_sld > <n^2> (1 + 1e-6); see ``standard_bound``."""
        return self.qfi_sld > self.purified_bound * (1 + 1e-6)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["exceeds_purified_bound"] = self.exceeds_purified_bound
        return d


def compute_qfi(rho0: np.ndarray, abs_lambda: float, *, eig_floor: float = EIG_FLOOR,
                step: float | None = None, bures: bool = True) -> QfiResult:
    """SLD and Bures QFI for |lambda| together with the purification references
    <n^2> and 4 <n^2> of the input state."""
    res = sld(dephased(rho0, abs_lambda), drho_dlambda(rho0, abs_lambda), eig_floor)
    if bures:
        fb, step = qfi_bures_step(rho0, abs_lambda, step)
    else:
        fb, step = float("nan"), (step if step is not None else default_step(abs_lambda))
    n2 = photon_stats(rho0).mean_n2
    return QfiResult(abs_lambda, res.qfi, fb, n2, 4 * n2, eig_floor, step,
                     res.residual, res.discarded_weight)
