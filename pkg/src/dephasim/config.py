"""JSON run configuration for the command-line front end.

Every section is optional; missing sections take the defaults below, which
give the default runs (three Wigner probes at kappa t in {0.05, 0.1, 1};
a photon-number sweep of SSKitten, CbPhS, SqCat and SS at |lambda| = 0.5).
Validation errors name the offending field and, where it can be located, the
line of the config file it appears on.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import METHODS
from .errors import ConfigError
from .probes import Family, ProbeSpec
from .purification import OptomechParams

COMMANDS = ("state", "evolve", "wigner", "qfi", "sweep", "purify-check")
FORMATS = ("csv", "json")

DEFAULT_WIGNER_PROBES = (
    {"family": "Coherent", "alpha": 2.0},
    {"family": "SqueezedVacuum", "r": 0.8},
    {"family": "Cat", "alpha": 2.0},
)
DEFAULT_WIGNER_KAPPA_T = (0.05, 0.1, 1.0)
DEFAULT_SWEEP_FAMILIES = (
    {"family": "SSKitten", "r": 0.5},
    {"family": "CbPhS"},
    {"family": "SqCat", "r": 0.5},
    {"family": "SS"},
)
DEFAULT_QFI_LAMBDAS = (0.1, 0.25, 0.5, 1.0, 1.5, 2.0)
# the parametrization is quadratic at |lambda| = 0; QFI is only reported above this
MIN_ABS_LAMBDA = 0.05


@dataclass(frozen=True)
class SweepConfig:
    families: tuple[ProbeSpec, ...]
    param: str = "mean_n"  # or "abs_lambda"
    values: tuple[float, ...] = ()
    abs_lambda: tuple[float, ...] = (0.5,)
    max_dim: int = 2048
    qfi: bool = True


@dataclass(frozen=True)
class WignerConfig:
    probes: tuple[ProbeSpec, ...]
    kappa_t: tuple[float, ...] = DEFAULT_WIGNER_KAPPA_T
    n_radial: int | None = None
    r_max: float | None = None
    n_angular: int | None = None
    binary: bool = False


@dataclass(frozen=True)
class RunConfig:
    command: str | None = None
    probe: ProbeSpec = ProbeSpec(Family.Coherent, alpha=1.0)
    kappa_t: float = 0.5
    kraus_terms: int | None = None
    method: str = "closed"
    optomech: OptomechParams = OptomechParams(g=0.3, omega_m=1.0, omega_c=1.0, t=1.0)
    qfi_lambdas: tuple[float, ...] = DEFAULT_QFI_LAMBDAS
    qfi_step: float | None = None
    eig_floor: float = 1e-12
    sweep: SweepConfig = field(default_factory=lambda: default_sweep())
    wigner: WignerConfig = field(default_factory=lambda: default_wigner())
    dim: int | None = None
    max_dim: int = 400
    out: str | None = None
    format: str = "csv"
    strict: bool = False
    jobs: int = 1

    def to_dict(self) -> dict:
        """Plain-JSON view of every setting that can influence results."""
        sw, wg = self.sweep, self.wigner
        om = self.optomech
        return {
            "command": self.command,
            "probe": self.probe.to_json(),
            "channel": {"kappa_t": self.kappa_t, "kraus_terms": self.kraus_terms,
                        "method": self.method},
            "optomech": {"g": om.g, "omega_m": om.omega_m, "omega_c": om.omega_c, "t": om.t},
            "qfi": {"abs_lambda": list(self.qfi_lambdas), "step": self.qfi_step,
                    "eig_floor": self.eig_floor},
            "sweep": {"families": [f.to_json() for f in sw.families],
                      "axis": {"param": sw.param, "values": list(sw.values)},
                      "abs_lambda": list(sw.abs_lambda), "max_dim": sw.max_dim, "qfi": sw.qfi},
            "wigner": {"probes": [p.to_json() for p in wg.probes], "kappa_t": list(wg.kappa_t),
                       "n_radial": wg.n_radial, "r_max": wg.r_max, "n_angular": wg.n_angular,
                       "binary": wg.binary},
            "dim": self.dim,
            "max_dim": self.max_dim,
            "strict": self.strict,
            "format": self.format,
        }

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def axis_values(lo: float, hi: float, points: int) -> tuple[float, ...]:
    # rounded so that grid points print as typed (0.9, not 0.8999999999999999)
    return tuple(float(v) for v in np.round(np.linspace(lo, hi, points), 12))


def default_sweep() -> SweepConfig:
    return SweepConfig(tuple(ProbeSpec.from_json(d) for d in DEFAULT_SWEEP_FAMILIES),
                       "mean_n", axis_values(0.3, 1.5, 7))


def default_wigner() -> WignerConfig:
    return WignerConfig(tuple(ProbeSpec.from_json(d) for d in DEFAULT_WIGNER_PROBES))


class _Ctx:
    """Carries the raw text so errors can point at a line."""

    def __init__(self, text: str, source: str):
        self.text, self.source = text, source

    def fail(self, path: str, msg: str):
        key = path.rsplit(".", 1)[-1].split("[", 1)[0]
        line = None
        if key:
            idx = self.text.find(f'"{key}"')
            if idx >= 0:
                line = self.text.count("\n", 0, idx) + 1
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: field '{path}': {msg}")


def _section(ctx, obj, name, allowed):
    sec = obj.get(name, {})
    if not isinstance(sec, dict):
        ctx.fail(name, "must be a JSON object")
    extra = set(sec) - set(allowed)
    if extra:
        ctx.fail(f"{name}.{sorted(extra)[0]}", f"unknown key (allowed: {', '.join(sorted(allowed))})")
    return sec


def _num(ctx, path, v, *, lo=None, hi=None, lo_open=False, integer=False, optional=False):
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(path, f"expected a number, got {json.dumps(v)}")
    if not math.isfinite(v):
        ctx.fail(path, "must be finite")
    if integer and int(v) != v:
        ctx.fail(path, f"expected an integer, got {v}")
    if lo is not None and (v <= lo if lo_open else v < lo):
        ctx.fail(path, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        ctx.fail(path, f"must be <= {hi}, got {v}")
    return int(v) if integer else float(v)


def _num_list(ctx, path, v, **kw):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v:
        ctx.fail(path, "expected a number or a non-empty list of numbers")
    return tuple(_num(ctx, f"{path}[{i}]", x, **kw) for i, x in enumerate(v))


def _probe(ctx, path, v) -> ProbeSpec:
    if isinstance(v, str):
        v = {"family": v}
    if not isinstance(v, dict):
        ctx.fail(path, "expected a probe object or family name")
    if "family" not in v:
        ctx.fail(f"{path}.family", "missing")
    if v["family"] not in Family.__members__:
        ctx.fail(f"{path}.family", f"unknown family {v['family']!r} (choose from {', '.join(Family.__members__)})")
    for key in ("r", "gamma", "q", "p"):
        if key in v:
            _num(ctx, f"{path}.{key}", v[key])
    for key in ("s", "fock_n"):
        if key in v:
            _num(ctx, f"{path}.{key}", v[key], lo=0, integer=True)
    try:
        return ProbeSpec.from_json(v)
    except (ValueError, TypeError) as exc:
        ctx.fail(path, str(exc))


def _bool(ctx, path, v):
    if not isinstance(v, bool):
        ctx.fail(path, f"expected true/false, got {json.dumps(v)}")
    return v


def parse_config(text: str = "{}", source: str = "<config>") -> RunConfig:
    """Parse and validate a JSON config document.

    Raises
    ------
    ConfigError
        On malformed JSON or any invalid field, with a field/line diagnostic.
    """
    ctx = _Ctx(text, source)
    try:
        obj = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    top = {"command", "probe", "channel", "optomech", "qfi", "sweep", "wigner", "grid",
           "dim", "max_dim", "output", "strict", "jobs"}
    extra = set(obj) - top
    if extra:
        ctx.fail(sorted(extra)[0], f"unknown key (allowed: {', '.join(sorted(top))})")
    kw: dict = {}
    if "command" in obj:
        if obj["command"] not in COMMANDS:
            ctx.fail("command", f"must be one of {', '.join(COMMANDS)}")
        kw["command"] = obj["command"]
    if "probe" in obj:
        kw["probe"] = _probe(ctx, "probe", obj["probe"])

    ch = _section(ctx, obj, "channel", {"kappa_t", "kraus_terms", "method"})
    if "kappa_t" in ch:
        kw["kappa_t"] = _num(ctx, "channel.kappa_t", ch["kappa_t"], lo=0)
    if "kraus_terms" in ch:
        kw["kraus_terms"] = _num(ctx, "channel.kraus_terms", ch["kraus_terms"], lo=1,
                                 integer=True, optional=True)
    if "method" in ch:
        if ch["method"] not in METHODS:
            ctx.fail("channel.method", f"must be one of {', '.join(METHODS)}")
        kw["method"] = ch["method"]

    om = _section(ctx, obj, "optomech", {"g", "omega_m", "omega_c", "t"})
    if om:
        base = RunConfig.optomech
        kw["optomech"] = OptomechParams(
            g=_num(ctx, "optomech.g", om.get("g", base.g)),
            omega_m=_num(ctx, "optomech.omega_m", om.get("omega_m", base.omega_m), lo=0, lo_open=True),
            omega_c=_num(ctx, "optomech.omega_c", om.get("omega_c", base.omega_c)),
            t=_num(ctx, "optomech.t", om.get("t", base.t), lo=0))

    q = _section(ctx, obj, "qfi", {"abs_lambda", "step", "eig_floor"})
    if "abs_lambda" in q:
        kw["qfi_lambdas"] = _num_list(ctx, "qfi.abs_lambda", q["abs_lambda"], lo=MIN_ABS_LAMBDA)
    if "step" in q:
        kw["qfi_step"] = _num(ctx, "qfi.step", q["step"], lo=0, lo_open=True, optional=True)
    if "eig_floor" in q:
        kw["eig_floor"] = _num(ctx, "qfi.eig_floor", q["eig_floor"], lo=0)

    sw = _section(ctx, obj, "sweep", {"families", "axis", "abs_lambda", "max_dim", "qfi"})
    if sw:
        base = default_sweep()
        skw: dict = {}
        if "families" in sw:
            fams = sw["families"]
            if not isinstance(fams, list) or not fams:
                ctx.fail("sweep.families", "expected a non-empty list")
            skw["families"] = tuple(_probe(ctx, f"sweep.families[{i}]", f) for i, f in enumerate(fams))
        if "axis" in sw:
            ax = sw["axis"]
            if not isinstance(ax, dict):
                ctx.fail("sweep.axis", "must be a JSON object")
            extra = set(ax) - {"param", "min", "max", "points", "values"}
            if extra:
                ctx.fail(f"sweep.axis.{sorted(extra)[0]}", "unknown key")
            param = ax.get("param", "mean_n")
            if param not in ("mean_n", "abs_lambda"):
                ctx.fail("sweep.axis.param", "must be 'mean_n' or 'abs_lambda'")
            skw["param"] = param
            if "values" in ax:
                skw["values"] = _num_list(ctx, "sweep.axis.values", ax["values"],
                                          lo=MIN_ABS_LAMBDA if param == "abs_lambda" else 0.0)
            else:
                for key in ("min", "max", "points"):
                    if key not in ax:
                        ctx.fail(f"sweep.axis.{key}", "missing (or give 'values')")
                a = _num(ctx, "sweep.axis.min", ax["min"],
                         lo=MIN_ABS_LAMBDA if param == "abs_lambda" else 0.0)
                b = _num(ctx, "sweep.axis.max", ax["max"], lo=a)
                n = _num(ctx, "sweep.axis.points", ax["points"], lo=1, integer=True)
                skw["values"] = axis_values(a, b, n)
        if "abs_lambda" in sw:
            skw["abs_lambda"] = _num_list(ctx, "sweep.abs_lambda", sw["abs_lambda"], lo=MIN_ABS_LAMBDA)
        if "max_dim" in sw:
            skw["max_dim"] = _num(ctx, "sweep.max_dim", sw["max_dim"], lo=8, integer=True)
        if "qfi" in sw:
            skw["qfi"] = _bool(ctx, "sweep.qfi", sw["qfi"])
        kw["sweep"] = replace(base, **skw)

    wg = _section(ctx, obj, "wigner", {"probes", "kappa_t", "binary"})
    gr = _section(ctx, obj, "grid", {"r_max", "n_radial", "n_angular"})
    if wg or gr:
        base = default_wigner()
        wkw: dict = {}
        if "probes" in wg:
            ps = wg["probes"]
            if not isinstance(ps, list) or not ps:
                ctx.fail("wigner.probes", "expected a non-empty list")
            wkw["probes"] = tuple(_probe(ctx, f"wigner.probes[{i}]", p) for i, p in enumerate(ps))
        if "kappa_t" in wg:
            wkw["kappa_t"] = _num_list(ctx, "wigner.kappa_t", wg["kappa_t"], lo=0)
        if "binary" in wg:
            wkw["binary"] = _bool(ctx, "wigner.binary", wg["binary"])
        if "r_max" in gr:
            wkw["r_max"] = _num(ctx, "grid.r_max", gr["r_max"], lo=0, lo_open=True)
        if "n_radial" in gr:
            wkw["n_radial"] = _num(ctx, "grid.n_radial", gr["n_radial"], lo=3, integer=True)
        if "n_angular" in gr:
            na = _num(ctx, "grid.n_angular", gr["n_angular"], lo=64, integer=True)
            if na % 2:
                ctx.fail("grid.n_angular", "must be even")
            wkw["n_angular"] = na
        kw["wigner"] = replace(base, **wkw)

    if "dim" in obj:
        kw["dim"] = _num(ctx, "dim", obj["dim"], lo=2, integer=True, optional=True)
    if "max_dim" in obj:
        kw["max_dim"] = _num(ctx, "max_dim", obj["max_dim"], lo=8, integer=True)
    if "strict" in obj:
        kw["strict"] = _bool(ctx, "strict", obj["strict"])
    if "jobs" in obj:
        kw["jobs"] = _num(ctx, "jobs", obj["jobs"], lo=1, integer=True)
    out = _section(ctx, obj, "output", {"path", "format"})
    if "path" in out:
        if not isinstance(out["path"], str):
            ctx.fail("output.path", "expected a string")
        kw["out"] = out["path"]
    if "format" in out:
        if out["format"] not in FORMATS:
            ctx.fail("output.format", "must be 'csv' or 'json'")
        kw["format"] = out["format"]
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))
