"""Probe states (coherent, cat, compass, squeezed superpositions, cubic phase,
mod-SSW, Fock) and their photon-number statistics."""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import optimize

from . import fock
from .errors import BracketError, DegenerateState, TruncationError, TruncationWarning
from .fock import FockSpace, Tolerances, TOL


class Family(str, enum.Enum):
    Coherent = "Coherent"
    Cat = "Cat"
    Kitten = "Kitten"
    SqCat = "SqCat"
    SS = "SS"
    SqCS = "SqCS"
    SSKitten = "SSKitten"
    CbPhS = "CbPhS"
    ModSSW = "ModSSW"
    Fock = "Fock"
    SqueezedVacuum = "SqueezedVacuum"


# continuous knob that moves <n> for each family
FREE_PARAM = {
    Family.Coherent: "alpha", Family.Cat: "alpha", Family.Kitten: "alpha",
    Family.SqCat: "alpha", Family.SqCS: "alpha", Family.SSKitten: "alpha",
    Family.SS: "r", Family.SqueezedVacuum: "r", Family.CbPhS: "gamma",
}


@dataclass(frozen=True)
class ProbeSpec:
    family: Family
    alpha: complex = 0.0
    r: float = 0.0
    gamma: float = 0.0
    s: int = 20
    q: float = 1.0
    p: float = 1.0
    fock_n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))

    def to_json(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        a = complex(self.alpha)
        d["alpha"] = a.real if a.imag == 0 else [a.real, a.imag]
        return d

    @classmethod
    def from_json(cls, obj: dict | str) -> "ProbeSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown ProbeSpec field(s): {sorted(unknown)}")
        if "family" not in obj:
            raise ValueError("ProbeSpec requires 'family'")
        kw = dict(obj)
        if "alpha" in kw:
            a = kw["alpha"]
            if isinstance(a, (list, tuple)):
                a = complex(a[0], a[1])
            elif isinstance(a, dict):
                a = complex(a.get("re", 0.0), a.get("im", 0.0))
            kw["alpha"] = complex(a)
        for key in ("r", "gamma", "q", "p"):
            if key in kw:
                kw[key] = float(kw[key])
        for key in ("s", "fock_n"):
            if key in kw:
                kw[key] = int(kw[key])
        return cls(**kw)


@dataclass(frozen=True)
class PhotonStats:
    mean_n: float
    mean_n2: float
    var_n: float
    agarwal_q: float


def _compass(alpha: complex, dim: int) -> np.ndarray:
    return sum(fock.coherent_amplitudes(alpha * 1j ** k, dim) for k in range(4))


def _raw_probe(dim: int, spec: ProbeSpec) -> np.ndarray:
    """Unnormalized probe amplitudes in a dim-dimensional working space."""
    space = FockSpace(dim)
    fam = spec.family
    a = complex(spec.alpha)
    if fam is Family.Coherent:
        return fock.coherent_amplitudes(a, dim)
    if fam is Family.Cat:
        return fock.coherent_amplitudes(a, dim) + fock.coherent_amplitudes(-a, dim)
    if fam is Family.Kitten:
        return _compass(a, dim)
    if fam is Family.Fock:
        return space.basis(spec.fock_n)
    if fam is Family.ModSSW:
        n = np.arange(min(spec.s + 1, dim))
        if spec.s + 1 > dim:
            raise TruncationError(f"mod-SSW with s={spec.s} needs dim > {spec.s}")
        out = np.zeros(dim, dtype=complex)
        out[n] = (n + spec.q) ** (-spec.p)
        return out
    if fam is Family.CbPhS:
        return fock.cubic_phase_vacuum_amplitudes(spec.gamma, dim)
    vac = space.basis(0)
    with warnings.catch_warnings():
        # tail of the padded working space is judged after cropping
        warnings.simplefilter("ignore", TruncationWarning)
        sp = fock.squeeze_op(space, spec.r)
        sm = fock.squeeze_op(space, -spec.r) if fam in (Family.SS, Family.SSKitten) else None
    if fam is Family.SqueezedVacuum:
        return sp @ vac
    if fam is Family.SS:
        return sp @ vac + sm @ vac
    if fam is Family.SqCS:
        return sp @ fock.coherent_amplitudes(a, dim)
    if fam is Family.SqCat:
        return sp @ (fock.coherent_amplitudes(a, dim) + fock.coherent_amplitudes(-a, dim))
    if fam is Family.SSKitten:
        k = _compass(a, dim)
        return sp @ k + sm @ k
    raise ValueError(f"unsupported family {fam}")


def _pad(dim: int) -> int:
    return dim + max(16, dim)


def build_probe(space: FockSpace, spec: ProbeSpec, *, strict: bool = False,
                tol: Tolerances = TOL) -> np.ndarray:
    """Normalized probe state of ``spec`` in ``space``.

    Superpositions use unit weights before a single global normalization.
    The state is constructed in a padded working space and cropped, so the
    retained amplitudes do not feel the cutoff of the squeeze/cubic generators.

    Raises
    ------
    DegenerateState
        Pre-normalization norm below 1e-12.
    TruncationError
        In strict mode, if more than ``tol.tail`` of the weight is cropped.
    """
    # the padded space also measures how much weight the crop discards
    work = _raw_probe(space.dim if spec.family is Family.Fock else _pad(space.dim), spec)
    total = float(np.vdot(work, work).real)
    if math.sqrt(total) < 1e-12:
        raise DegenerateState(f"{spec.family.value} superposition has vanishing norm")
    psi = work[: space.dim]
    kept = float(np.vdot(psi, psi).real)
    leak = 1.0 - kept / total
    if leak > tol.tail:
        msg = (f"{spec.family.value}: {leak:.3e} of the state lies beyond dim={space.dim}; "
               "raise dim")
        if strict:
            raise TruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return psi / math.sqrt(kept)


def tail_mass(psi: np.ndarray, start: int) -> float:
    p = np.abs(np.asarray(psi)) ** 2
    return float(p[start:].sum() / p.sum())


def photon_stats(state: np.ndarray) -> PhotonStats:
    """Photon-number moments of a pure state or density matrix."""
    state = np.asarray(state)
    p = np.abs(state) ** 2 if state.ndim == 1 else np.real(np.diag(state))
    p = p / p.sum()
    n = np.arange(len(p), dtype=float)
    mean = float(p @ n)
    mean2 = float(p @ n ** 2)
    var = mean2 - mean ** 2
    q = var / mean if mean >= 1e-12 else float("nan")
    return PhotonStats(mean, mean2, var, q)


def adaptive_dim(spec: ProbeSpec, *, tail: float = 1e-12, shift: float = 1e-8,
                 start: int = 8, max_dim: int = 400) -> int:
    """Smallest cutoff with sum_{n >= dim-4} |c_n|^2 < ``tail`` whose photon
    moments move by less than ``shift`` when the cutoff is doubled."""
    dim = max(start, 6)
    if spec.family is Family.Fock:
        dim = max(dim, spec.fock_n + 5)
    if spec.family is Family.ModSSW:
        dim = max(dim, spec.s + 5)
    while dim <= max_dim:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            psi = build_probe(FockSpace(dim), spec)
            if tail_mass(psi, dim - 4) < tail:
                s1 = photon_stats(psi)
                s2 = photon_stats(build_probe(FockSpace(2 * dim), spec))
                if (abs(s1.mean_n - s2.mean_n) < shift
                        and abs(s1.mean_n2 - s2.mean_n2) < shift * max(1.0, s2.mean_n2)):
                    return dim
        dim += max(4, dim // 4)
    raise TruncationError(f"no cutoff <= {max_dim} certifies {spec}")


def _with_param(template: ProbeSpec, name: str, value: float) -> ProbeSpec:
    if name == "alpha":
        a = complex(template.alpha)
        phase = a / abs(a) if a != 0 else 1.0
        return replace(template, alpha=value * phase)
    return replace(template, **{name: value})


def solve_param_for_mean_n(template: ProbeSpec, target_mean_n: float,
                           free_param: str | None = None, *, dim: int | None = None,
                           upper: float | None = None, atol: float = 1e-8,
                           max_dim: int = 400) -> ProbeSpec:
    """Tune one continuous parameter of ``template`` so that <n> hits the target.

    ``free_param`` is one of ``alpha`` (magnitude, phase kept), ``r`` or
    ``gamma``; it defaults to the family's natural knob. The bracket [0, upper]
    grows until it covers the target, then shrinks to its outermost monotone
    branch: for families whose <n> dips before rising (squeezed cats at fixed
    r) the large-parameter solution is returned. Brent's method finishes.

    Raises
    ------
    BracketError
        Target unreachable, <n> not monotone on the branch, or tolerance missed.
    """
    if target_mean_n < 0:
        raise BracketError("target <n> must be non-negative")
    fam = template.family
    if fam is Family.Fock:
        k = round(target_mean_n)
        if abs(k - target_mean_n) > atol:
            raise BracketError(f"Fock states only reach integer <n>, not {target_mean_n}")
        return replace(template, fock_n=int(k))
    name = free_param or FREE_PARAM.get(fam)
    if name is None:
        raise BracketError(f"{fam.value} has no continuous parameter to tune <n>")
    if name not in ("alpha", "r", "gamma"):
        raise BracketError(f"unknown free parameter {name!r}")
    if fam is Family.CbPhS and name == "gamma" and dim is None:
        # <n> = 27 gamma^2 / 8 exactly for exp(-i gamma x^3)|0>
        return replace(template, gamma=math.sqrt(8 * target_mean_n / 27))
    if upper is None:
        upper = {"alpha": math.sqrt(target_mean_n) + 1.0,
                 "r": math.asinh(math.sqrt(target_mean_n)) + 0.25,
                 "gamma": math.sqrt(8 * target_mean_n / 27) + 0.2}[name]

    def mean_n(x, d):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            return photon_stats(build_probe(FockSpace(d), _with_param(template, name, x))).mean_n

    for _ in range(12):
        d = dim or adaptive_dim(_with_param(template, name, upper), max_dim=max_dim)
        if mean_n(upper, d) >= target_mean_n:
            break
        upper *= 1.5
    else:
        raise BracketError(f"target <n>={target_mean_n} not reached by {fam.value} via {name}")

    xs = np.linspace(0.0, upper, 33)
    vals = np.array([mean_n(x, d) for x in xs])
    i0 = int(np.argmin(vals))
    xs, vals = xs[i0:], vals[i0:]
    if np.any(np.diff(vals) < -1e-12):
        raise BracketError(f"<n> is not monotone in {name} on [{xs[0]:.3g}, {upper:.3g}]")
    if abs(vals[0] - target_mean_n) < atol:
        return _with_param(template, name, float(xs[0]))
    if not vals[0] <= target_mean_n <= vals[-1]:
        raise BracketError(
            f"target <n>={target_mean_n} outside reachable range [{vals[0]:.6g}, {vals[-1]:.6g}] "
            f"for {fam.value} via {name}")
    i = int(np.searchsorted(vals, target_mean_n))
    if vals[i] == target_mean_n:
        return _with_param(template, name, float(xs[i]))
    x = optimize.brentq(lambda t: mean_n(t, d) - target_mean_n, xs[i - 1], xs[i],
                        xtol=1e-15, rtol=1e-15, maxiter=200)
    miss = abs(mean_n(x, d) - target_mean_n)
    if miss >= atol:
        raise BracketError(f"solver missed target by {miss:.3e}")
    return _with_param(template, name, float(x))
