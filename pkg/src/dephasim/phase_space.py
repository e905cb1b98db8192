"""Wigner functions on polar grids, the angular phase marginal and the
angular-diffusion residual of the dephasing channel.

Convention: W(beta) = (2/pi) Tr[rho D(2 beta) Pi] with Pi = diag((-1)^n), so
the vacuum is (2/pi) exp(-2|beta|^2) and the integral of W over d^2 beta is 1.

Writing beta = r e^{i theta}, every Fock coherence rho_mn contributes a single
angular harmonic e^{i (n - m) theta}; the grid evaluation exploits this and
only needs real displacement matrices at the radial nodes.
"""
from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from . import channel, fock
from .errors import NormalizationError, TruncationError

# |2 beta|^2 beyond this under/overflows the Laguerre matrix elements
MAX_ARG2 = 700.0

BINARY_MAGIC = b"DPHW"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIQQd")


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform polar grid: radii linspace(0, r_max, n_radial), angles
    2 pi j / n_angular."""
    r_max: float
    n_radial: int = 256
    n_angular: int = 64

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.n_radial < 3:
            raise ValueError("n_radial must be >= 3")
        if self.n_angular < 64 or self.n_angular % 2:
            raise ValueError("n_angular must be even and >= 64")

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n_radial)

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_angular) / self.n_angular

    @property
    def dtheta(self) -> float:
        return 2 * np.pi / self.n_angular


def default_grid(rho: np.ndarray, *, n_radial: int | None = None,
                 tail: float = 1e-14) -> PhaseSpaceGrid:
    """Grid adapted to the occupied Fock range of ``rho``.

    With n_eff the highest level carrying more than ``tail`` of the upper
    cumulative population, r_max = sqrt(n_eff + 1/2) + 4 (classical turning
    radius plus a Gaussian margin). The radial node count grows with
    sqrt(n_eff) to resolve interference fringes; the angular count resolves
    every harmonic of rho.
    """
    pops = np.clip(np.real(np.diag(rho)), 0.0, None)
    upper = np.cumsum(pops[::-1])[::-1] / pops.sum()
    n_eff = int(np.nonzero(upper > tail)[0][-1])
    r_max = math.sqrt(n_eff + 0.5) + 4.0
    if n_radial is None:
        n_radial = max(257, 2 * math.ceil(12 * r_max * math.sqrt(n_eff + 1)) + 1)
    dim = rho.shape[0]
    return PhaseSpaceGrid(r_max, n_radial, max(64, 2 * dim))


@dataclass
class WignerField:
    grid: PhaseSpaceGrid
    values: np.ndarray  # (n_radial, n_angular)

    def normalization(self) -> float:
        return normalization(self)

    def to_csv(self, path=None, *, header: str = "") -> str:
        """CSV with columns |beta|, theta, W in row-major grid order."""
        buf = io.StringIO()
        if header:
            buf.write(header)
        buf.write("abs_beta,theta,W\n")
        r, th = self.grid.radii, self.grid.angles
        for i in range(self.grid.n_radial):
            for j in range(self.grid.n_angular):
                buf.write(f"{r[i]:.17g},{th[j]:.17g},{self.values[i, j]:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_bytes(self) -> bytes:
        g = self.grid
        head = _HEADER.pack(BINARY_MAGIC, BINARY_VERSION, g.n_radial, g.n_angular, g.r_max)
        return head + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    def write_binary(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "WignerField":
        magic, version, nr, na, r_max = _HEADER.unpack_from(blob)
        if magic != BINARY_MAGIC or version != BINARY_VERSION:
            raise ValueError("not a dephasim Wigner field (bad magic or version)")
        body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
        if body.size != nr * na:
            raise ValueError(f"expected {nr * na} values, found {body.size}")
        return cls(PhaseSpaceGrid(r_max, int(nr), int(na)), body.reshape(nr, na).astype(float))

    @classmethod
    def read_binary(cls, path) -> "WignerField":
        return cls.from_bytes(Path(path).read_bytes())


def _check_arg(radius: float) -> None:
    if (2 * radius) ** 2 > MAX_ARG2:
        raise TruncationError(
            f"|2 beta|^2 = {(2 * radius) ** 2:.1f} exceeds {MAX_ARG2}; shrink r_max")


def wigner_point(rho: np.ndarray, beta: complex) -> float:
    """W(beta) from the displaced-parity trace.

    Raises
    ------
    TruncationError
        If |2 beta| is outside the numerically safe displacement range.
    """
    _check_arg(abs(beta))
    dim = rho.shape[0]
    par = (-1.0) ** np.arange(dim)
    d = fock.displacement_elements(2 * complex(beta), dim)
    val = (2 / np.pi) * np.sum(rho.T * d * par[None, :])
    if abs(val.imag) > 1e-10:
        raise ValueError(f"Wigner value has imaginary part {val.imag:.3e}; is rho Hermitian?")
    return float(val.real)


def wigner_weyl(rho: np.ndarray, beta: complex, *, points: int | None = None) -> float:
    """W(beta) from the position-space Weyl transform
    (2/pi) int dy <x+y|rho|x-y> exp(-2 i p y), beta = (x + i p)/sqrt(2).

    Independent of the displacement matrix elements; used as a cross-check.
    """
    dim = rho.shape[0]
    x0, p0 = math.sqrt(2) * beta.real, math.sqrt(2) * beta.imag
    half = math.sqrt(2 * dim + 1) + 8.0
    points = points or int(max(2001, 40 * half * (1 + abs(p0))))
    y = np.linspace(-half, half, points)
    hp = fock.hermite_functions(dim, x0 + y)
    hm = fock.hermite_functions(dim, x0 - y)
    kern = np.einsum("my,mn,ny->y", hp, rho, hm)
    val = (2 / np.pi) * integrate.trapezoid(kern * np.exp(-2j * p0 * y), y)
    return float(val.real)


def _harmonic_coeffs(rho: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """c[i, k + dim - 1] with W(r_i, theta) = sum_k c[i, k] e^{i k theta}."""
    dim = rho.shape[0]
    par = (-1.0) ** np.arange(dim)
    a = rho.T * par[None, :]  # a[n, m] = rho_mn (-1)^m
    n, m = np.indices((dim, dim))
    kidx = (n - m + dim - 1).ravel()
    out = np.zeros((len(radii), 2 * dim - 1), dtype=complex)
    for i, r in enumerate(radii):
        prod = (a * fock.displacement_elements(2.0 * r, dim).real).ravel()
        out[i] = (np.bincount(kidx, prod.real, 2 * dim - 1)
                  + 1j * np.bincount(kidx, prod.imag, 2 * dim - 1))
    return (2 / np.pi) * out


def wigner_grid(rho: np.ndarray, grid: PhaseSpaceGrid | None = None) -> WignerField:
    """Wigner function of ``rho`` on a polar grid.

    Raises
    ------
    TruncationError
        If the grid reaches beyond the safe displacement range.
    """
    grid = grid or default_grid(rho)
    _check_arg(grid.r_max)
    dim = rho.shape[0]
    coeffs = _harmonic_coeffs(rho, grid.radii)
    ks = np.arange(-(dim - 1), dim)
    phases = np.exp(1j * np.outer(ks, grid.angles))
    return WignerField(grid, np.real(coeffs @ phases))


def _radial_integral(values: np.ndarray, radii: np.ndarray) -> np.ndarray:
    # (1/2) int W d|beta|^2 = int W |beta| d|beta|
    return integrate.simpson(values * radii[:, None], x=radii, axis=0)


def normalization(field: WignerField) -> float:
    return float(_radial_integral(field.values, field.grid.radii).sum() * field.grid.dtheta)


def angular_marginal(field: WignerField, *, tol: float = 1e-6) -> np.ndarray:
    """P_W(theta) = (1/2) int_0^inf d|beta|^2 W(|beta| e^{i theta}).

    Raises
    ------
    NormalizationError
        If sum P_W dtheta deviates from 1 by more than ``tol``.
    """
    p = _radial_integral(field.values, field.grid.radii)
    total = p.sum() * field.grid.dtheta
    if abs(total - 1.0) > tol:
        raise NormalizationError(
            f"angular marginal integrates to {total:.9f}; enlarge r_max or n_radial")
    return p


def negativity_volume(field: WignerField) -> float:
    """int |W| d^2 beta - 1; positive iff W has negative regions."""
    r = field.grid.radii
    return float(_radial_integral(np.abs(field.values), r).sum() * field.grid.dtheta - 1.0)


def uniformity(marginal: np.ndarray) -> float:
    """max_theta |P_W(theta) - 1/(2 pi)|."""
    return float(np.max(np.abs(marginal - 1 / (2 * np.pi))))


def max_min_ratio(marginal: np.ndarray) -> float:
    lo = float(np.min(marginal))
    return float(np.max(marginal)) / lo if lo > 0 else math.inf


def circular_variance(marginal: np.ndarray) -> float:
    """1 - |<e^{i theta}>| of the angular marginal."""
    th = 2 * np.pi * np.arange(len(marginal)) / len(marginal)
    w = marginal / marginal.sum()
    return float(1.0 - abs(np.sum(w * np.exp(1j * th))))


def spectral_d2_theta(values: np.ndarray) -> np.ndarray:
    """Second angular derivative along the last axis by FFT."""
    n = values.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0  # Nyquist mode has no well-defined derivative
    return np.real(np.fft.ifft(-(k ** 2) * np.fft.fft(values, axis=-1), axis=-1))


def diffusion_residual(rho0: np.ndarray, kappa_t: float, dt: float | None = None,
                       grid: PhaseSpaceGrid | None = None, *, on: str = "wigner",
                       coefficient: float = 0.5) -> float:
    """Relative max-norm residual of d/dtau W = coefficient * d^2/dtheta^2 W.

    The tau derivative is a central difference of the dephased Wigner field
    (or of its angular marginal with ``on='marginal'``); the angular one is
    spectral. The result is normalized by max|coefficient * d^2 W|. When both
    sides vanish (Fock-diagonal input) the absolute residual is returned.
    The dephasing generator gives ``coefficient = 1/2`` in tau = kappa t.
    """
    if on not in ("wigner", "marginal"):
        raise ValueError("on must be 'wigner' or 'marginal'")
    dt = dt if dt is not None else 1e-3 * max(kappa_t, 1.0)
    if kappa_t - dt < 0:
        raise ValueError("kappa_t - dt must be >= 0")
    grid = grid or default_grid(rho0)

    def field(tau):
        w = wigner_grid(channel.apply_closed_form(rho0, tau), grid).values
        if on == "marginal":
            w = _radial_integral(w, grid.radii)
        return w

    lhs = (field(kappa_t + dt) - field(kappa_t - dt)) / (2 * dt)
    rhs = coefficient * spectral_d2_theta(field(kappa_t))
    err = float(np.max(np.abs(lhs - rhs)))
    scale = float(np.max(np.abs(rhs)))
    return err / scale if scale > 1e-12 else err
