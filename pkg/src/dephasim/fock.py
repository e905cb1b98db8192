"""Truncated single-mode Fock space: ladder operators, Gaussian and cubic
unitaries, spectral helpers and two-mode bookkeeping.

Operators are dense complex ``(dim, dim)`` arrays, pure states are complex
``(dim,)`` arrays and density matrices are complex ``(dim, dim)`` arrays.
Quadrature convention: ``x = (a + a^dag) / sqrt(2)`` so the vacuum variance
of ``x`` is 1/2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg as sla
from scipy import special

from .errors import DimensionMismatch, NotHermitian, TruncationError, TruncationWarning

X_CONVENTION = "x = (a + a^dag)/sqrt(2), hbar = 1"
SQUEEZE_CONVENTION = "S(zeta) = exp((conj(zeta) a^2 - zeta a^dag^2)/2)"


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    unitary: float = 1e-9
    trace: float = 1e-10
    positivity: float = 1e-10
    tail: float = 1e-8

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


TOL = Tolerances()


@dataclass(frozen=True)
class FockSpace:
    """Fock cutoff ``dim``; basis states are |0>, ..., |dim-1>."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock dimension must be an integer >= 2, got {self.dim!r}")

    @cached_property
    def a(self) -> np.ndarray:
        return annihilation_op(self)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @cached_property
    def n(self) -> np.ndarray:
        return number_op(self)

    @cached_property
    def x(self) -> np.ndarray:
        return (self.a + self.adag) / np.sqrt(2)

    @cached_property
    def parity(self) -> np.ndarray:
        return np.diag((-1.0) ** np.arange(self.dim)).astype(complex)

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def basis(self, k: int) -> np.ndarray:
        if not 0 <= k < self.dim:
            raise TruncationError(f"|{k}> is outside a Fock space of dimension {self.dim}")
        v = np.zeros(self.dim, dtype=complex)
        v[k] = 1.0
        return v


def check_space(space: FockSpace, *arrays) -> None:
    for arr in arrays:
        if any(s != space.dim for s in np.shape(arr)):
            raise DimensionMismatch(
                f"array of shape {np.shape(arr)} does not live in dimension {space.dim}")


def annihilation_op(space: FockSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.dim)), k=1).astype(complex)


def creation_op(space: FockSpace) -> np.ndarray:
    return annihilation_op(space).conj().T


def number_op(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim, dtype=float)).astype(complex)


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """Probability weight of |alpha> on Fock states n >= dim."""
    return float(special.pdtrc(dim - 1, abs(alpha) ** 2))


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Exact Fock amplitudes of |alpha> for n < dim (not renormalized)."""
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * special.gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def _tail_check(mass: float, what: str, strict: bool, tol: float) -> None:
    if mass > tol:
        msg = f"{what}: tail mass {mass:.3e} beyond the cutoff exceeds {tol:.1e}; raise dim"
        if strict:
            raise TruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=3)


def displacement_elements(alpha: complex, dim: int) -> np.ndarray:
    """Exact matrix elements <m|D(alpha)|n> for m, n < dim via associated
    Laguerre polynomials.

    For m >= n, ``<m|D|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2)
    L_n^(m-n)(|alpha|^2)``; the m < n half follows from D(alpha)^dag = D(-alpha).
    These are the infinite-space elements restricted to the cutoff, not the
    exponential of a truncated generator.
    """
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    x = abs(alpha) ** 2
    m, n = np.indices((dim, dim))
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    lag = special.eval_genlaguerre(lo, k, x)
    logpref = 0.5 * (special.gammaln(lo + 1) - special.gammaln(hi + 1)) + k * np.log(abs(alpha)) - 0.5 * x
    phase = np.where(m >= n,
                     np.exp(1j * k * np.angle(alpha)),
                     np.exp(1j * k * np.angle(-np.conj(alpha))))
    return np.exp(logpref) * lag * phase


def displacement_op(space: FockSpace, alpha: complex, *, strict: bool = False,
                    tol: Tolerances = TOL) -> np.ndarray:
    """Displacement operator D(alpha) = exp(alpha a^dag - conj(alpha) a).

    Warns (or raises :class:`TruncationError` when ``strict``) if the coherent
    state |alpha> leaks more than ``tol.tail`` beyond the cutoff.
    """
    _tail_check(coherent_tail_mass(alpha, space.dim), f"D({alpha})", strict, tol.tail)
    return displacement_elements(complex(alpha), space.dim)


def expm_antihermitian(gen: np.ndarray) -> np.ndarray:
    """exp(G) for anti-Hermitian G through the Hermitian eigendecomposition of
    iG; the result is unitary to machine precision."""
    h = 1j * gen
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w)) @ v.conj().T


def expm(mat: np.ndarray) -> np.ndarray:
    """General matrix exponential (Pade scaling-and-squaring)."""
    return sla.expm(mat)


def squeezed_vacuum_amplitudes(r: float, dim: int) -> np.ndarray:
    """Exact Fock amplitudes of S(r)|0> for real r (not renormalized)."""
    out = np.zeros(dim, dtype=complex)
    if r == 0:
        out[0] = 1.0
        return out
    m = np.arange((dim + 1) // 2)
    t = np.tanh(r)
    logmag = (special.gammaln(2 * m + 1) / 2 - special.gammaln(m + 1) - m * np.log(2)
              - 0.5 * np.log(np.cosh(r)) + m * np.log(abs(t)))
    out[2 * m] = np.exp(logmag) * (-np.sign(t)) ** m
    return out


def squeeze_op(space: FockSpace, zeta: complex, *, strict: bool = False,
               tol: Tolerances = TOL) -> np.ndarray:
    """Squeeze operator S(zeta) = exp((conj(zeta) a^2 - zeta a^dag^2) / 2) of
    the truncated generator (exactly unitary in the truncated space)."""
    r = abs(zeta)
    amps = squeezed_vacuum_amplitudes(r, space.dim)
    _tail_check(max(0.0, 1.0 - float(np.vdot(amps, amps).real)), f"S({zeta})", strict, tol.tail)
    if zeta == 0:
        return space.identity
    a2 = space.a @ space.a
    gen = 0.5 * (np.conj(zeta) * a2 - zeta * a2.conj().T)
    return expm_antihermitian(gen)


def cubic_phase_op(space: FockSpace, gamma: float) -> np.ndarray:
    """Cubic phase gate exp(-i gamma x^3) built from the spectral
    decomposition of the truncated quadrature x (exactly unitary)."""
    if gamma == 0:
        return space.identity
    w, v = np.linalg.eigh(space.x)
    return (v * np.exp(-1j * gamma * w ** 3)) @ v.conj().T


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Position wavefunctions <x|n> for n < nmax, shape ``(nmax, len(x))``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x ** 2)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, nmax - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def cubic_phase_vacuum_amplitudes(gamma: float, dim: int) -> np.ndarray:
    """Fock amplitudes of exp(-i gamma x^3)|0> by trapezoidal quadrature of
    <n|x> exp(-i gamma x^3) <x|0> on |x| <= 10 (spectrally accurate; cheap
    for cutoffs in the thousands)."""
    half = 10.0
    kmax = np.sqrt(2 * dim + 1) + 3 * abs(gamma) * half ** 2 + 12.0
    h = np.pi / (2 * kmax)
    npts = 2 * int(np.ceil(half / h)) + 1
    x = np.linspace(-half, half, npts)
    h = x[1] - x[0]
    psi = hermite_functions(dim, x)
    integrand = psi[0] * np.exp(-1j * gamma * x ** 3)
    return (psi @ integrand) * h


def eigendecompose_hermitian(op: np.ndarray, atol: float = 1e-10):
    """Ascending eigenvalues and unitary eigenvector matrix of a Hermitian op.

    Raises
    ------
    NotHermitian
        If ``max|A - A^dag| > atol``.
    """
    op = np.asarray(op)
    dev = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
    if dev > atol:
        raise NotHermitian(f"operator deviates from Hermitian by {dev:.3e}")
    w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
    return w, v


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor (cavity) is the major index, so
    |i>|j> maps to index i * dim_b + j."""
    return np.kron(a, b)


def partial_trace_second(rho: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    da, db = dims
    rho = np.asarray(rho)
    if rho.shape != (da * db, da * db):
        raise DimensionMismatch(f"rho shape {rho.shape} incompatible with dims {dims}")
    return np.einsum("ijkj->ik", rho.reshape(da, db, da, db))


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """<psi|A|psi> for a vector or Tr[rho A] for a density matrix."""
    state = np.asarray(state)
    op = np.asarray(op)
    if op.shape[0] != state.shape[0]:
        raise DimensionMismatch(f"state dim {state.shape[0]} vs operator dim {op.shape[0]}")
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(state @ op))


def to_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def validate_density(rho: np.ndarray, tol: Tolerances = TOL) -> None:
    """Raise ValueError unless rho is Hermitian, unit trace and PSD."""
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol.hermitian * max(1.0, np.max(np.abs(rho))):
        raise ValueError(f"density matrix not Hermitian ({herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol.trace:
        raise ValueError(f"density matrix trace {tr!r} != 1")
    lmin = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lmin < -tol.positivity:
        raise ValueError(f"density matrix has negative eigenvalue {lmin:.3e}")
