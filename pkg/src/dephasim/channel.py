"""Single-mode bosonic dephasing channel in four interchangeable forms.

All forms act on dense Fock-basis density matrices and use the dimensionless
time tau = kappa_dph * t:

* ``integrate_master_equation`` -- RK4 integration of
  d rho/d tau = (1/2)(2 n rho n - n^2 rho - rho n^2);
* ``apply_kraus`` -- truncated operator sum with diagonal Kraus operators
  E_k = sqrt(tau^k / k!) n^k exp(-tau n^2 / 2);
* ``apply_closed_form`` -- rho_nm -> exp(-tau (n - m)^2 / 2) rho_nm;
* ``apply_phase_average`` -- Gaussian average of phase rotations
  exp(i n phi) rho exp(-i n phi), phi ~ N(0, tau), on the real line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import KrausTruncationError, PositivityViolation, QuadratureError

METHODS = ("closed", "kraus", "lindblad", "phase")


@dataclass(frozen=True)
class ChannelParam:
    kappa_t: float
    kraus_terms: int | None = None

    def __post_init__(self):
        if not self.kappa_t >= 0:
            raise ValueError(f"kappa_t must be >= 0, got {self.kappa_t}")
        if self.kraus_terms is not None and self.kraus_terms < 1:
            raise ValueError("kraus_terms must be >= 1")


def _n(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=float)


def dephasing_mask(kappa_t: float, dim: int) -> np.ndarray:
    n = _n(dim)
    return np.exp(-0.5 * kappa_t * (n[:, None] - n[None, :]) ** 2)


def lindblad_rhs(rho: np.ndarray, kappa: float) -> np.ndarray:
    """Right-hand side (kappa/2)(2 n rho n - n^2 rho - rho n^2)."""
    num = np.diag(_n(rho.shape[0])).astype(complex)
    num2 = num @ num
    return 0.5 * kappa * (2 * num @ rho @ num - num2 @ rho - rho @ num2)


def _rk4(rho: np.ndarray, tau: float, steps: int) -> np.ndarray:
    h = tau / steps
    y = np.array(rho, dtype=complex)
    for _ in range(steps):
        k1 = lindblad_rhs(y, 1.0)
        k2 = lindblad_rhs(y + 0.5 * h * k1, 1.0)
        k3 = lindblad_rhs(y + 0.5 * h * k2, 1.0)
        k4 = lindblad_rhs(y + h * k3, 1.0)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _tidy(rho: np.ndarray, *, check_psd: float | None = None) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    if check_psd is not None:
        lmin = np.linalg.eigvalsh(rho)[0]
        if lmin < -check_psd:
            raise PositivityViolation(f"minimum eigenvalue {lmin:.3e} after integration")
    return rho


def integrate_master_equation(rho0: np.ndarray, kappa_t: float, steps: int) -> np.ndarray:
    """Fixed-step classical RK4 in tau = kappa t, re-Hermitized and
    trace-renormalized.

    Raises
    ------
    PositivityViolation
        If the minimum eigenvalue of the result is below -1e-8.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if kappa_t == 0:
        return np.array(rho0, dtype=complex)
    return _tidy(_rk4(rho0, kappa_t, steps), check_psd=1e-8)


def integrate_converged(rho0: np.ndarray, kappa_t: float, *, tol: float = 1e-10,
                        max_steps: int = 2 ** 20) -> tuple[np.ndarray, int]:
    """Halve the RK4 step until the max-element change drops below ``tol``.

    The first attempt sits just inside RK4's real-axis stability limit for the
    fastest coherence, tau * (dim-1)^2 / 2 / h < 2.78.
    """
    dim = rho0.shape[0]
    if kappa_t == 0:
        return np.array(rho0, dtype=complex), 0
    rate = 0.5 * (dim - 1) ** 2
    steps = max(1, math.ceil(kappa_t * rate / 2.0))
    prev = integrate_master_equation(rho0, kappa_t, steps)
    while steps < max_steps:
        steps *= 2
        cur = integrate_master_equation(rho0, kappa_t, steps)
        if np.max(np.abs(cur - prev)) < tol:
            return cur, steps
        prev = cur
    raise RuntimeError(f"RK4 did not converge within {max_steps} steps")


def default_kraus_terms(kappa_t: float, dim: int) -> int:
    m = dim - 1
    return math.ceil(kappa_t * m * m + 8 * math.sqrt(kappa_t) * m + 16)


def kraus_diagonals(kappa_t: float, dim: int, terms: int) -> np.ndarray:
    """Diagonals of E_k = sqrt(tau^k/k!) n^k exp(-tau n^2/2), shape (terms, dim)."""
    n = _n(dim)
    k = np.arange(terms, dtype=float)[:, None]
    out = np.zeros((terms, dim))
    out[0, 0] = 1.0  # n = 0 only survives the k = 0 term (0^0 = 1)
    if kappa_t == 0:
        out[0, :] = 1.0
        return out
    logv = (0.5 * (k * math.log(kappa_t) - special.gammaln(k + 1))
            + k * np.log(n[1:]) - 0.5 * kappa_t * n[1:] ** 2)
    out[:, 1:] = np.exp(logv)
    return out


def kraus_completeness_defect(kappa_t: float, dim: int, terms: int) -> float:
    e = kraus_diagonals(kappa_t, dim, terms)
    return float(np.max(np.abs((e ** 2).sum(axis=0) - 1.0)))


def apply_kraus(rho0: np.ndarray, param: ChannelParam, *, tol: float = 1e-10) -> np.ndarray:
    """Truncated operator-sum representation of the channel.

    Raises
    ------
    KrausTruncationError
        If max|sum_k E_k^dag E_k - I| on the retained space exceeds ``tol``.
    """
    dim = rho0.shape[0]
    terms = param.kraus_terms or default_kraus_terms(param.kappa_t, dim)
    e = kraus_diagonals(param.kappa_t, dim, terms)
    defect = float(np.max(np.abs((e ** 2).sum(axis=0) - 1.0)))
    if defect > tol:
        raise KrausTruncationError(
            f"{terms} Kraus terms leave completeness defect {defect:.3e} > {tol:.1e}")
    out = np.zeros_like(rho0, dtype=complex)
    for ek in e:
        out += ek[:, None] * rho0 * ek[None, :]
    return out


def apply_closed_form(rho0: np.ndarray, kappa_t: float) -> np.ndarray:
    if kappa_t < 0:
        raise ValueError("kappa_t must be >= 0")
    return dephasing_mask(kappa_t, rho0.shape[0]) * rho0


def default_quad_points(kappa_t: float, dim: int) -> int:
    # enough probabilists' Gauss-Hermite nodes to integrate exp(i k sigma x)
    # for the largest coherence order k = dim - 1
    w = math.sqrt(kappa_t) * (dim - 1)
    return max(64, math.ceil(0.5 * w * w + 6 * w + 32))


def _phase_average(rho0: np.ndarray, kappa_t: float, points: int) -> np.ndarray:
    x, w = special.roots_hermitenorm(points)
    w = w / math.sqrt(2 * math.pi)
    phi = math.sqrt(kappa_t) * x
    n = _n(rho0.shape[0])
    out = np.zeros_like(rho0, dtype=complex)
    for p, wt in zip(phi, w):
        u = np.exp(1j * n * p)
        out += wt * (u[:, None] * rho0 * u.conj()[None, :])
    return out


def apply_phase_average(rho0: np.ndarray, kappa_t: float,
                        quad_points: int | None = None, *, tol: float = 1e-8) -> np.ndarray:
    """Gaussian phase-rotation average by Gauss-Hermite quadrature.

    The result at ``2 * quad_points`` nodes is returned after checking it
    differs from the ``quad_points`` estimate by at most ``tol``.

    Raises
    ------
    QuadratureError
        If doubling the node count moves any element by more than ``tol``.
    """
    if kappa_t == 0:
        return np.array(rho0, dtype=complex)
    q = quad_points or default_quad_points(kappa_t, rho0.shape[0])
    if q < 64:
        raise ValueError("quad_points must be >= 64")
    coarse = _phase_average(rho0, kappa_t, q)
    fine = _phase_average(rho0, kappa_t, 2 * q)
    change = np.max(np.abs(fine - coarse))
    if change > tol:
        raise QuadratureError(f"doubling {q} nodes changed rho by {change:.3e}")
    return fine


def dephase(rho0: np.ndarray, kappa_t: float, method: str = "closed") -> np.ndarray:
    """Apply the channel with the chosen representation (see ``METHODS``)."""
    if method == "closed":
        return apply_closed_form(rho0, kappa_t)
    if method == "kraus":
        return apply_kraus(rho0, ChannelParam(kappa_t))
    if method == "lindblad":
        return integrate_converged(rho0, kappa_t)[0]
    if method == "phase":
        return apply_phase_average(rho0, kappa_t)
    raise ValueError(f"unknown channel method {method!r}; choose from {METHODS}")


def l1_coherence(rho: np.ndarray) -> float:
    return float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))
