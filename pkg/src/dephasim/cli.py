"""Command-line front end: ``dephasim <command> [--config FILE] [options]``.

Commands
--------
state         build a probe and report its photon statistics and amplitudes
evolve        apply the dephasing channel in a chosen representation
wigner        Wigner fields and phase-marginal summaries on a probe x kappa_t grid
qfi           SLD and Bures QFI of one probe over a list of |lambda|
sweep         photon statistics, purified bound and QFI over probe families
purify-check  optomechanical trace-out versus the dephasing channel

CSV output carries a versioned header of ``#`` comment lines (config hash,
Fock dimensions, tolerances, conventions); JSON output is a single object
with ``meta`` and ``data`` keys. Exit status is 0 iff no point failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, channel, fock, phase_space, probes, purification, qfi
from .config import COMMANDS, RunConfig, load_config, parse_config
from .errors import ConfigError, DephasimError, TruncationError, ZeroInformation
from .probes import Family, ProbeSpec

CSV_VERSION = "# dephasim-csv v1"
SWEEP_COLUMNS = ("probe_family", "param_json", "mean_n", "mean_n2", "var_n", "agarwal_q",
                 "abs_lambda", "qfi_sld", "qfi_bures", "purified_bound", "dim", "error")
FIDELITY_CONVENTION = "F = Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) (square-root fidelity)"
LAMBDA_CONVENTION = "kappa_t = |lambda|^2"
ORDERING_RIVALS = ("CbPhS", "SqCat", "SS")
ORDERING_RANGE = (0.0, 1.5)


def fmt(x) -> str:
    """Deterministic text form of a number (shortest round-trip repr)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _error_text(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def _param_json(spec: ProbeSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True, separators=(",", ":"))


def _tolerances(cfg: RunConfig) -> dict:
    tol = fock.TOL.as_dict()
    tol.update({"eig_floor": cfg.eig_floor, "bures_rtol": 1e-3, "probe_tail": 1e-12,
                "moment_shift": 1e-8})
    return tol


def _meta(cfg: RunConfig, command: str, dims, extra: dict | None = None) -> dict:
    meta = {
        "format": "dephasim-json v1",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.sha256(),
        "dims": dims,
        "tolerances": _tolerances(cfg),
        "conventions": {"x": fock.X_CONVENTION, "squeeze": fock.SQUEEZE_CONVENTION,
                        "fidelity": FIDELITY_CONVENTION, "lambda": LAMBDA_CONVENTION},
    }
    if extra:
        meta.update(extra)
    return meta


def _csv_header(meta: dict) -> str:
    lines = [CSV_VERSION,
             f"# command: {meta['command']}",
             f"# config_sha256: {meta['config_sha256']}",
             f"# dims: {json.dumps(meta['dims'])}",
             f"# tolerances: {json.dumps(meta['tolerances'], sort_keys=True)}"]
    for key, val in meta["conventions"].items():
        lines.append(f"# convention {key}: {val}")
    for key in ("lambda", "abs_lambda", "abs_lambda_sq"):
        if key in meta:
            lines.append(f"# {key}: {json.dumps(_jsonable(meta[key]))}")
    for flag in meta.get("flags", []):
        lines.append(f"# FLAG {flag}")
    return "\n".join(lines) + "\n"


def _write_csv(meta: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(_csv_header(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) if not isinstance(row[c], str) else row[c] for c in columns])
    return buf.getvalue()


def _write_json(meta: dict, data) -> str:
    return json.dumps({"meta": _jsonable(meta), "data": _jsonable(data)}, indent=2,
                      sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _build(spec: ProbeSpec, cfg: RunConfig, max_dim: int | None = None) -> tuple[np.ndarray, int]:
    """Probe vector and the cutoff used (fixed or adaptively certified)."""
    if cfg.dim is not None:
        dim = cfg.dim
    else:
        dim = probes.adaptive_dim(spec, max_dim=max_dim or cfg.max_dim)
    psi = probes.build_probe(fock.FockSpace(dim), spec, strict=cfg.strict)
    return psi, dim


# ---------------------------------------------------------------- state / evolve

def cmd_state(cfg: RunConfig) -> tuple[str, int]:
    psi, dim = _build(cfg.probe, cfg)
    st = probes.photon_stats(psi)
    meta = _meta(cfg, "state", [dim])
    if cfg.format == "json":
        data = {"probe": cfg.probe.to_json(), "dim": dim, "stats": vars(st),
                "tail_mass_last4": probes.tail_mass(psi, dim - 4),
                "amplitudes": [[c.real, c.imag] for c in psi]}
        return _write_json(meta, data), 0
    rows = [{"n": n, "re": c.real, "im": c.imag, "prob": abs(c) ** 2} for n, c in enumerate(psi)]
    return _write_csv(meta, ("n", "re", "im", "prob"), rows), 0


def cmd_evolve(cfg: RunConfig) -> tuple[str, int]:
    psi, dim = _build(cfg.probe, cfg)
    rho0 = fock.to_density(psi)
    if cfg.method == "kraus":
        rho = channel.apply_kraus(rho0, channel.ChannelParam(cfg.kappa_t, cfg.kraus_terms))
    else:
        rho = channel.dephase(rho0, cfg.kappa_t, cfg.method)
    ref = channel.apply_closed_form(rho0, cfg.kappa_t)
    dev = float(np.max(np.abs(rho - ref)))
    meta = _meta(cfg, "evolve", [dim], {"method": cfg.method, "kappa_t": cfg.kappa_t})
    if cfg.format == "json":
        data = {"probe": cfg.probe.to_json(), "dim": dim, "kappa_t": cfg.kappa_t,
                "method": cfg.method, "stats_in": vars(probes.photon_stats(rho0)),
                "stats_out": vars(probes.photon_stats(rho)),
                "l1_coherence_in": channel.l1_coherence(rho0),
                "l1_coherence_out": channel.l1_coherence(rho),
                "max_deviation_from_closed_form": dev,
                "rho_re": rho.real.tolist(), "rho_im": rho.imag.tolist()}
        return _write_json(meta, data), 0
    rows = [{"n": n, "m": m, "re": rho[n, m].real, "im": rho[n, m].imag}
            for n in range(dim) for m in range(dim)]
    return _write_csv(meta, ("n", "m", "re", "im"), rows), 0


# ---------------------------------------------------------------- QFI rows

def _qfi_rows(spec: ProbeSpec, psi: np.ndarray, dim: int, lambdas, cfg: RunConfig,
              with_qfi: bool = True, detail: bool = False) -> list[dict]:
    st = probes.photon_stats(psi)
    rho0 = fock.to_density(psi)
    rows = []
    for lam in lambdas:
        row = {"probe_family": spec.family.value, "param_json": _param_json(spec),
               "mean_n": st.mean_n, "mean_n2": st.mean_n2, "var_n": st.var_n,
               "agarwal_q": st.agarwal_q, "abs_lambda": lam, "qfi_sld": math.nan,
               "qfi_bures": math.nan, "purified_bound": purification.purified_qfi_lambda(psi),
               "dim": dim, "error": ""}
        if with_qfi:
            try:
                res = qfi.compute_qfi(rho0, lam, eig_floor=cfg.eig_floor, step=cfg.qfi_step)
                row["qfi_sld"], row["qfi_bures"] = res.qfi_sld, res.qfi_bures
                if detail:
                    row.update({k: v for k, v in res.as_dict().items()
                                if k in ("standard_bound", "fd_step", "sld_residual",
                                         "discarded_weight", "exceeds_purified_bound")})
            except (DephasimError, ValueError, np.linalg.LinAlgError) as exc:
                row["error"] = _error_text(exc)
        rows.append(row)
    return rows


def cmd_qfi(cfg: RunConfig) -> tuple[str, int]:
    psi, dim = _build(cfg.probe, cfg)
    detail = cfg.format == "json"
    rows = _qfi_rows(cfg.probe, psi, dim, cfg.qfi_lambdas, cfg, detail=detail)
    meta = _meta(cfg, "qfi", [dim])
    nerr = sum(bool(r["error"]) for r in rows)
    text = _write_json(meta, rows) if detail else _write_csv(meta, SWEEP_COLUMNS, rows)
    return text, int(nerr > 0)


# ---------------------------------------------------------------- sweep

def _sweep_point(task) -> list[dict]:
    template, target, lambdas, cfg = task
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            spec = template
            if target is not None:
                spec = probes.solve_param_for_mean_n(template, target, dim=cfg.dim,
                                                     max_dim=cfg.sweep.max_dim)
            psi, dim = _build(spec, cfg, cfg.sweep.max_dim)
        except (DephasimError, ValueError) as exc:
            hint = "; raise sweep.max_dim or pass --dim" if isinstance(exc, TruncationError) else ""
            return [{"probe_family": template.family.value, "param_json": _param_json(template),
                     "mean_n": math.nan, "mean_n2": math.nan, "var_n": math.nan,
                     "agarwal_q": math.nan, "abs_lambda": lam, "qfi_sld": math.nan,
                     "qfi_bures": math.nan, "purified_bound": math.nan, "dim": cfg.dim or 0,
                     "error": _error_text(exc) + hint} for lam in lambdas]
        return _qfi_rows(spec, psi, dim, lambdas, cfg, with_qfi=cfg.sweep.qfi)


def sweep_tasks(cfg: RunConfig) -> list[tuple]:
    sw = cfg.sweep
    if sw.param == "mean_n":
        return [(fam, target, sw.abs_lambda, cfg) for fam in sw.families for target in sw.values]
    return [(fam, None, sw.values, cfg) for fam in sw.families]


def ordering_flags(rows: list[dict], targets) -> list[str]:
    """Points in (0, 1.5) where SSKitten's purified bound does not exceed
    CbPhS, SqCat or SS at matched <n>."""
    best: dict = {}
    for row in rows:
        key = (row["probe_family"], row["_target"])
        best.setdefault(key, row["purified_bound"])
    misses = []
    for t in targets:
        if not ORDERING_RANGE[0] < t < ORDERING_RANGE[1]:
            continue
        mine = best.get(("SSKitten", t))
        if mine is None or math.isnan(mine):
            continue
        for rival in ORDERING_RIVALS:
            other = best.get((rival, t))
            if other is not None and not math.isnan(other) and not mine > other:
                misses.append(f"<n>={fmt(t)}: SSKitten {mine:.6g} <= {rival} {other:.6g}")
    if not misses:
        return []
    return ["sskitten-ordering: SSKitten does not dominate at matched <n> in (0, 1.5) under this "
            "configuration: " + "; ".join(misses)]


def run_sweep(cfg: RunConfig) -> tuple[list[dict], list[str]]:
    tasks = sweep_tasks(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = []
    for task, chunk in zip(tasks, results):
        for row in chunk:
            row["_target"] = task[1]
            rows.append(row)
    flags = []
    if cfg.sweep.param == "mean_n":
        fams = {f.family.value for f in cfg.sweep.families}
        if "SSKitten" in fams and fams & set(ORDERING_RIVALS):
            flags = ordering_flags(rows, cfg.sweep.values)
    for row in rows:
        row.pop("_target")
    return rows, flags


def cmd_sweep(cfg: RunConfig, result: tuple[list, list] | None = None) -> tuple[str, int]:
    """Render a sweep; ``result`` reuses rows and flags from ``run_sweep``."""
    rows, flags = run_sweep(cfg) if result is None else result
    for flag in flags:
        print(f"dephasim: FLAG {flag}", file=sys.stderr)
    dims = sorted({r["dim"] for r in rows})
    meta = _meta(cfg, "sweep", dims, {"flags": flags, "axis": cfg.sweep.param})
    nerr = sum(bool(r["error"]) for r in rows)
    if cfg.format == "json":
        return _write_json(meta, rows), int(nerr > 0)
    return _write_csv(meta, SWEEP_COLUMNS, rows), int(nerr > 0)


# ---------------------------------------------------------------- wigner

def _wigner_grid(cfg: RunConfig, rho0: np.ndarray) -> phase_space.PhaseSpaceGrid:
    wg = cfg.wigner
    base = phase_space.default_grid(rho0, n_radial=wg.n_radial)
    return phase_space.PhaseSpaceGrid(wg.r_max or base.r_max, wg.n_radial or base.n_radial,
                                      wg.n_angular or base.n_angular)


def wigner_summary(cfg: RunConfig, out_dir: Path | None = None) -> tuple[dict, int]:
    """Compute every (probe, kappa_t) field; write CSV (and binary) files when
    ``out_dir`` is given. Returns the summary and the error count."""
    entries, checks, errors, dims = [], [], 0, []
    for i, spec in enumerate(cfg.wigner.probes):
        try:
            psi, dim = _build(spec, cfg)
            rho0 = fock.to_density(psi)
            grid = _wigner_grid(cfg, rho0)
        except DephasimError as exc:
            errors += 1
            entries.append({"probe": spec.to_json(), "error": _error_text(exc) + "; raise dim"})
            continue
        dims.append(dim)
        per_probe = []
        for kt in cfg.wigner.kappa_t:
            entry = {"probe": spec.to_json(), "kappa_t": kt, "dim": dim,
                     "grid": {"r_max": grid.r_max, "n_radial": grid.n_radial,
                              "n_angular": grid.n_angular}}
            try:
                field = phase_space.wigner_grid(channel.apply_closed_form(rho0, kt), grid)
                marg = phase_space.angular_marginal(field)
            except DephasimError as exc:
                errors += 1
                hint = "; raise dim or shrink grid.r_max" if isinstance(exc, TruncationError) else ""
                entry["error"] = _error_text(exc) + hint
                entries.append(entry)
                continue
            stem = f"{i:02d}_{spec.family.value}_kt{fmt(kt)}"
            entry.update({
                "normalization": field.normalization(),
                "w_min": float(field.values.min()), "w_max": float(field.values.max()),
                "negativity_volume": phase_space.negativity_volume(field),
                "uniformity": phase_space.uniformity(marg),
                "max_min_ratio": phase_space.max_min_ratio(marg),
                "circular_variance": phase_space.circular_variance(marg),
                "csv": f"{stem}.csv",
            })
            if out_dir is not None:
                meta = _meta(cfg, "wigner", [dim], {"kappa_t": kt})
                field.to_csv(out_dir / f"{stem}.csv", header=_csv_header(meta))
                if cfg.wigner.binary:
                    field.write_binary(out_dir / f"{stem}.bin")
                    entry["binary"] = f"{stem}.bin"
            per_probe.append(entry)
            entries.append(entry)
        ordered = sorted(per_probe, key=lambda e: e["kappa_t"])
        unif = [e["uniformity"] for e in ordered]
        checks.append({"probe": spec.to_json(),
                       "uniformity_strictly_improves": all(b < a for a, b in zip(unif, unif[1:])),
                       "min_w_at_largest_kappa_t": ordered[-1]["w_min"] if ordered else None})
    return {"fields": entries, "checks": checks, "dims": dims}, errors


def cmd_wigner(cfg: RunConfig) -> tuple[str, int]:
    out_dir = Path(cfg.out or "wigner_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    summary, errors = wigner_summary(cfg, out_dir)
    meta = _meta(cfg, "wigner", summary.pop("dims"))
    text = _write_json(meta, summary)
    (out_dir / "summary.json").write_text(text)
    return text, int(errors > 0)


# ---------------------------------------------------------------- purify-check

ORACLE_MAX_DIM = 512


def _expm_oracle(psi: np.ndarray, p, tail: float = 1e-12) -> dict:
    """Closed-form two-mode state against dense exp(-iHt) in a product space
    of at most ORACLE_MAX_DIM.

    The mechanics must hold the peak excursion along the whole trajectory,
    not just the final one, so the cavity is cropped (coarser tails first
    tried last) until both fit.
    """
    w = np.abs(psi) ** 2
    upper = np.cumsum(w[::-1])[::-1]
    peak = purification.peak_abs_lambda(p)
    for crop in (tail, 1e-10, 1e-8, 1e-6):
        dim_c = max(2, int(np.count_nonzero(upper > crop)))
        sub = psi[:dim_c] / np.linalg.norm(psi[:dim_c])
        dim_m = purification.mechanical_dim(sub, p, tail=1e-10, abs_lambda=peak, start=2)
        if dim_c * dim_m <= ORACLE_MAX_DIM:
            break
    else:
        return {"expm_state_fidelity": None, "expm_dims": None, "expm_crop_tail": None,
                "expm_note": f"peak mechanical excursion {peak:.3g} does not fit {ORACLE_MAX_DIM} states"}
    # both routes share the truncated mechanical space, so no leak check here
    ana = purification.optomech_evolve(sub, p, dim_m, tail=1.0)
    ex = purification.optomech_evolve_expm(sub, p, dim_m)
    return {"expm_state_fidelity": float(abs(np.vdot(ex, ana)) ** 2), "expm_dims": [dim_c, dim_m],
            "expm_crop_tail": float(upper[dim_c]) if dim_c < len(upper) else 0.0}


def purify_report(cfg: RunConfig) -> tuple[dict, int]:
    p = cfg.optomech
    psi, dim_c = _build(cfg.probe, cfg)
    lam = purification.lambda_param(p)
    dim_m = purification.mechanical_dim(psi, p)
    two = purification.optomech_evolve(psi, p, dim_m)
    rho_c = purification.reduced_cavity_state(two, (dim_c, dim_m))
    rho0 = fock.to_density(psi)
    ref = channel.apply_closed_form(rho0, lam.kappa_t)
    mod_dev = float(np.max(np.abs(np.abs(rho_c) - np.abs(ref))))
    phases = purification.phase_field(rho_c, ref)
    g_an = purification.generator_variance(psi, p)
    g_dir = purification.generator_variance_direct(psi, p)
    report = {
        "probe": cfg.probe.to_json(), "dim_c": dim_c, "dim_m": dim_m,
        "optomech": {"g": p.g, "omega_m": p.omega_m, "omega_c": p.omega_c, "t": p.t},
        "lambda": [lam.value.real, lam.value.imag], "abs_lambda": lam.abs_lambda,
        "abs_lambda_sq": lam.kappa_t,
        "max_modulus_discrepancy": mod_dev,
        "max_abs_phase": float(np.nanmax(np.abs(phases))) if np.any(np.isfinite(phases)) else 0.0,
        "fidelity_with_input": float(np.real(np.vdot(psi, rho_c @ psi))),
        "generator_variance_analytic": g_an,
        "generator_variance_direct": g_dir,
        "mean_n2": purification.purified_qfi_lambda(psi),
    }
    report.update(_expm_oracle(psi, p))
    for target, key in (("abs_lambda", "qcrb_abs_lambda"), ("g", "qcrb_g")):
        try:
            report[key] = purification.qcrb(psi, p, target)
        except ZeroInformation as exc:
            report[key] = None
            report[f"{key}_note"] = _error_text(exc)
    failures = []
    if mod_dev > 1e-8:
        failures.append("modulus discrepancy above 1e-8")
    if abs(g_an - g_dir) > 1e-10 * max(1.0, g_an):
        failures.append("generator variance mismatch above 1e-10")
    fid = report["expm_state_fidelity"]
    if fid is not None and fid < 1 - 1e-7:
        failures.append("matrix-exponential state fidelity below 1 - 1e-7")
    report["failures"] = failures
    return report, len(failures)


def cmd_purify_check(cfg: RunConfig) -> tuple[str, int]:
    report, nfail = purify_report(cfg)
    meta = _meta(cfg, "purify-check", [report["dim_c"], report["dim_m"]],
                 {"lambda": report["lambda"], "abs_lambda": report["abs_lambda"],
                  "abs_lambda_sq": report["abs_lambda_sq"]})
    return _write_json(meta, report), int(nfail > 0)


HANDLERS = {"state": cmd_state, "evolve": cmd_evolve, "wigner": cmd_wigner, "qfi": cmd_qfi,
            "sweep": cmd_sweep, "purify-check": cmd_purify_check}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dephasim", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration (built-in defaults if omitted)")
    ap.add_argument("--out", help="output file (directory for 'wigner'); stdout if omitted")
    ap.add_argument("--dim", type=int, help="fixed Fock cutoff instead of the adaptive one")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--jobs", type=int, help="worker processes for sweeps")
    ap.add_argument("--strict", action="store_true", default=None,
                    help="treat truncation warnings as errors")
    ap.add_argument("--method", choices=channel.METHODS, help="channel representation for 'evolve'")
    ap.add_argument("--version", action="version", version=f"dephasim {__version__}")
    return ap


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else parse_config("{}")
    over = {"command": args.command}
    if args.out is not None:
        over["out"] = args.out
    if args.dim is not None:
        if args.dim < 2:
            raise ConfigError("--dim must be >= 2")
        over["dim"] = args.dim
    if args.format is not None:
        over["format"] = args.format
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        over["jobs"] = args.jobs
    if args.strict:
        over["strict"] = True
    if args.method is not None:
        over["method"] = args.method
    return replace(cfg, **over)


def run(cfg: RunConfig) -> tuple[str, int]:
    return HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"dephasim: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"dephasim: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        text, code = run(cfg)
    except TruncationError as exc:
        print(f"dephasim: {_error_text(exc)} (remedy: raise --dim or max_dim)", file=sys.stderr)
        return 1
    except DephasimError as exc:
        print(f"dephasim: {_error_text(exc)}", file=sys.stderr)
        return 1
    if cfg.command != "wigner":
        _emit(text, cfg.out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
