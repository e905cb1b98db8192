"""Worked reference values for each module, checked against analytic oracles."""
import math

import numpy as np
import pytest

from dephasim import channel, cli, fock, phase_space as ps, probes, purification as pur, qfi
from dephasim.config import parse_config
from dephasim.errors import ZeroSlope
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec, build_probe, photon_stats


def _psi(spec, dim=30):
    return build_probe(FockSpace(dim), spec)


def _rho(spec, dim=30):
    return fock.to_density(_psi(spec, dim))


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


# ------------------------------------------------------------------ probes

def test_cat_normalization_constant():
    psi = _psi(ProbeSpec(Family.Cat, alpha=1.0))
    raw = fock.coherent_amplitudes(1.0, 30) + fock.coherent_amplitudes(-1.0, 30)
    norm = 1 / math.sqrt(2 * (1 + math.exp(-2)))
    assert norm == pytest.approx(0.663625, abs=1e-6)
    np.testing.assert_allclose(psi, norm * raw, atol=1e-13)


def test_cat_small_alpha_is_vacuum():
    psi = _psi(ProbeSpec(Family.Cat, alpha=1e-6), 8)
    assert abs(psi[0]) == pytest.approx(1.0, abs=1e-12)


def test_squeezed_vacuum_statistics():
    s = photon_stats(_psi(ProbeSpec(Family.SqueezedVacuum, r=0.5), 60))
    assert s.var_n == pytest.approx(2 * math.sinh(0.5) ** 2 * math.cosh(0.5) ** 2, abs=1e-12)
    assert s.var_n == pytest.approx(0.690549, abs=1e-6)
    # Delta^2 n / <n> = 2 cosh^2 r: super-Poissonian
    assert s.agarwal_q == pytest.approx(2 * math.cosh(0.5) ** 2, abs=1e-12)
    assert s.agarwal_q > 1


def test_solver_reference_points():
    assert abs(probes.solve_param_for_mean_n(ProbeSpec(Family.Coherent, alpha=1.0), 2.25).alpha) \
        == pytest.approx(1.5, abs=1e-8)
    assert probes.solve_param_for_mean_n(ProbeSpec(Family.SqueezedVacuum), 0.27154).r \
        == pytest.approx(0.5, abs=1e-4)
    assert abs(probes.solve_param_for_mean_n(ProbeSpec(Family.Cat, alpha=1.0), 0.0).alpha) \
        == pytest.approx(0.0, abs=1e-6)


# ------------------------------------------------------------------ channel

def test_lindblad_rhs_reference():
    sp = FockSpace(8)
    assert np.max(np.abs(channel.lindblad_rhs(fock.to_density(sp.basis(3)), 1.0))) == 0.0
    rho = _rho(ProbeSpec(Family.Coherent, alpha=1.0), 16)
    n = np.arange(16)
    ref = -0.5 * (n[:, None] - n[None, :]) ** 2 * rho
    np.testing.assert_allclose(channel.lindblad_rhs(rho, 1.0), ref, atol=1e-15)
    assert abs(np.trace(channel.lindblad_rhs(random_density(9, 2), 1.0))) < 1e-12


def test_fixed_points_and_limits():
    rho = fock.to_density(FockSpace(5).basis(2))
    for method in channel.METHODS:
        np.testing.assert_allclose(channel.dephase(rho, 0.7, method), rho, atol=1e-14)
    diag = np.diag([0.2, 0.3, 0.5]).astype(complex)
    np.testing.assert_allclose(channel.integrate_master_equation(diag, 0.4, 10), diag, atol=1e-15)
    cat = _rho(ProbeSpec(Family.Cat, alpha=1.0), 12)
    out = channel.apply_closed_form(cat, 1e3)
    assert np.max(np.abs(out - np.diag(np.diag(out)))) < 1e-200
    np.testing.assert_array_equal(np.diag(out), np.diag(cat))


def test_phase_average_ratio():
    rho0 = _rho(ProbeSpec(Family.Coherent, alpha=1.0), 20)
    out = channel.apply_phase_average(rho0, 0.5)
    assert abs(out[1, 2]) / abs(rho0[1, 2]) == pytest.approx(math.exp(-0.25), abs=1e-10)


@pytest.mark.parametrize("kt", [0.05, 0.1, 1.0])
def test_kraus_closed_cat(kt):
    rho0 = _rho(ProbeSpec(Family.Cat, alpha=1.0), 20)
    diff = channel.apply_kraus(rho0, channel.ChannelParam(kt)) - channel.apply_closed_form(rho0, kt)
    assert np.max(np.abs(diff)) < 1e-10


# ------------------------------------------------------------------ phase space

def test_coherent_peak_and_marginal_direction():
    rho = _rho(ProbeSpec(Family.Coherent, alpha=1.0))
    assert ps.wigner_point(rho, 1.0) == pytest.approx(2 / np.pi, abs=1e-12)
    marg = ps.angular_marginal(ps.wigner_grid(rho))
    assert int(np.argmax(marg)) == 0


def test_fock_diagonal_marginal_and_residual():
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    marg = ps.angular_marginal(ps.wigner_grid(rho))
    assert np.ptp(marg) < 1e-12
    assert ps.diffusion_residual(rho, 0.1) < 1e-8


def test_marginal_diffusion_residual_coherent():
    rho = _rho(ProbeSpec(Family.Coherent, alpha=1.0))
    assert ps.diffusion_residual(rho, 0.1, on="marginal") < 1e-4


def even_cat_wigner(alpha, beta):
    """Two Gaussian lobes plus the cos(4 alpha Im beta) interference term."""
    n2 = 1 / (2 * (1 + math.exp(-2 * alpha ** 2)))
    lobes = math.exp(-2 * abs(beta - alpha) ** 2) + math.exp(-2 * abs(beta + alpha) ** 2)
    fringe = 2 * math.exp(-2 * abs(beta) ** 2) * math.cos(4 * alpha * beta.imag)
    return 2 / math.pi * n2 * (lobes + fringe)


def test_cat_fringes_negative():
    rho = _rho(ProbeSpec(Family.Cat, alpha=1.5))
    betas = [1j * y + x for y in np.linspace(0, 1.5, 13) for x in (0.0, 0.2)]
    got = np.array([ps.wigner_point(rho, b) for b in betas])
    ref = np.array([even_cat_wigner(1.5, b) for b in betas])
    np.testing.assert_allclose(got, ref, atol=1e-10)
    assert got.min() < -0.3
    dephased = channel.apply_closed_form(rho, 1.0)
    assert ps.wigner_grid(dephased).values.min() < 0


def test_undephased_field_equals_pure_state():
    rho = _rho(ProbeSpec(Family.Cat, alpha=1.0), 20)
    grid = ps.PhaseSpaceGrid(3.0, 9, 64)
    a = ps.wigner_grid(channel.apply_closed_form(rho, 0.0), grid).values
    np.testing.assert_array_equal(a, ps.wigner_grid(rho, grid).values)


def test_coherent_two_ratio_closer_to_one():
    rho0 = _rho(ProbeSpec(Family.Coherent, alpha=2.0), 48)
    grid = ps.default_grid(rho0)
    ratios = [ps.max_min_ratio(ps.angular_marginal(ps.wigner_grid(channel.apply_closed_form(rho0, kt), grid)))
              for kt in (0.05, 1.0)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1)


# ------------------------------------------------------------------ purification

def test_lambda_reference_values():
    assert pur.lambda_param(pur.OptomechParams(g=1.0, omega_m=1.0, t=0.0)).abs_lambda == 0.0
    lam = pur.lambda_param(pur.OptomechParams(g=1.0, omega_m=1.0, t=1.0)).abs_lambda
    assert lam == pytest.approx(0.95885, abs=5e-6)
    assert lam == pytest.approx(abs(1 - np.exp(-1j)), abs=1e-15)


def test_vacuum_and_single_photon_branches():
    p = pur.OptomechParams(g=0.4, omega_m=1.0, omega_c=0.5, t=1.3)
    dim_m = 30
    vac = pur.optomech_evolve(FockSpace(3).basis(0), p, dim_m)
    assert abs(vac[0]) == pytest.approx(1.0, abs=1e-14)
    one = FockSpace(3).basis(1)
    ex = pur.optomech_evolve_expm(one, p, dim_m)
    mech = pur.reduced_cavity_state(ex.reshape(3, dim_m).T.ravel(), (dim_m, 3))
    n_m = float(np.real(np.trace(mech @ FockSpace(dim_m).n)))
    assert n_m == pytest.approx(pur.lambda_param(p).kappa_t, abs=1e-10)


def test_reduced_state_ratio_and_diagonal():
    # |lambda|^2 = 0.5
    g = math.sqrt(0.5) / (math.sin(0.5) / 0.5)
    p = pur.OptomechParams(g=g, omega_m=1.0, t=1.0)
    assert pur.lambda_param(p).kappa_t == pytest.approx(0.5, abs=1e-14)
    psi = _psi(ProbeSpec(Family.Coherent, alpha=1.0), 16)
    state = pur.optomech_evolve(psi, p)
    red = pur.reduced_cavity_state(state, (16, len(state) // 16))
    rho0 = fock.to_density(psi)
    assert abs(red[2, 3]) / abs(rho0[2, 3]) == pytest.approx(math.exp(-0.25), abs=1e-10)
    np.testing.assert_allclose(np.diag(red).real, np.diag(rho0).real, rtol=0, atol=1e-11)


def test_decoupled_reduced_state_is_pure():
    p = pur.OptomechParams(g=0.3, omega_m=1.0, t=0.0)
    psi = _psi(ProbeSpec(Family.Cat, alpha=1.0), 16)
    red = pur.reduced_cavity_state(pur.optomech_evolve(psi, p), (16, 8))
    np.testing.assert_allclose(red, fock.to_density(psi), atol=1e-14)


def test_generator_variance_reference():
    unit = pur.OptomechParams(g=0.2, omega_m=1e-9, t=1.0)  # t j0 -> 1
    assert pur.generator_variance(FockSpace(4).basis(0), unit) == 0.0
    coh = _psi(ProbeSpec(Family.Coherent, alpha=1.0))
    assert pur.generator_variance(coh, unit) == pytest.approx(2.0, abs=1e-12)
    p = pur.OptomechParams(g=0.2, omega_m=1.0, t=1.5)
    assert pur.generator_variance(FockSpace(6).basis(3), p) == pytest.approx(9 * pur.envelope(p) ** 2, rel=1e-14)


def test_qcrb_reference():
    unit = pur.OptomechParams(g=0.2, omega_m=1e-9, t=1.0)
    assert pur.qcrb(FockSpace(6).basis(4), unit) == pytest.approx(1 / 16, abs=1e-15)
    coh = _psi(ProbeSpec(Family.Coherent, alpha=1.0))
    assert pur.qcrb(coh, unit, target="g") == pytest.approx(0.5, abs=1e-12)


def test_purify_check_at_revival():
    cfg = parse_config('{"optomech": {"g": 0.3, "omega_m": 1.0, "t": 6.283185307179586}}')
    rep, nfail = cli.purify_report(cfg)
    assert nfail == 0
    assert rep["abs_lambda"] < 1e-15
    # decoupled: the reduced state is pure again, so moduli match the input
    assert rep["max_modulus_discrepancy"] < 1e-12
    assert rep["expm_state_fidelity"] is None and "excursion" in rep["expm_note"]
    assert rep["qcrb_abs_lambda"] == pytest.approx(1 / rep["mean_n2"], rel=1e-14)


# ------------------------------------------------------------------ QFI

def test_drho_reference():
    rho0 = _rho(ProbeSpec(Family.Coherent, alpha=1.0), 12)
    assert np.max(np.abs(qfi.drho_dlambda(rho0, 0.0))) == 0.0
    assert np.max(np.abs(qfi.drho_dlambda(np.diag([0.5, 0.5]).astype(complex), 0.3))) == 0.0
    ref = -0.7 * 4 * math.exp(-0.49 * 4 / 2) * rho0[0, 2]
    assert qfi.drho_dlambda(rho0, 0.7)[0, 2] == pytest.approx(ref, abs=1e-15)


def test_sld_zero_and_rank_one():
    rho = _rho(ProbeSpec(Family.Cat, alpha=1.0), 12)
    assert np.max(np.abs(qfi.sld_operator(rho, np.zeros_like(rho)))) == 0.0
    # pure state with a tangent direction: L = 2 drho solves the equation
    psi = _psi(ProbeSpec(Family.Coherent, alpha=0.6), 12)
    h = FockSpace(12).x
    rho = fock.to_density(psi)
    drho = -1j * (h @ rho - rho @ h)
    res = qfi.sld(rho, drho)
    assert res.residual < 1e-9
    np.testing.assert_allclose(qfi.sld_residual(rho, 2 * drho, drho), 0.0, atol=1e-12)


@pytest.mark.parametrize("spec", [ProbeSpec(Family.Cat, alpha=1.0), ProbeSpec(Family.SS, r=0.5)])
def test_sld_bures_reference(spec):
    rho0 = _rho(spec, 40)
    a, b = qfi.qfi_sld(rho0, 0.5), qfi.qfi_bures(rho0, 0.5)
    assert abs(a - b) / a < 1e-4


def test_vacuum_and_fock_zero_qfi():
    assert qfi.qfi_sld(fock.to_density(FockSpace(4).basis(0)), 0.5) == 0.0
    assert abs(qfi.qfi_bures(fock.to_density(FockSpace(6).basis(3)), 0.5)) < 1e-8


def test_fidelity_reference():
    sp = FockSpace(20)
    vac, coh = sp.basis(0), fock.coherent_amplitudes(1.0, 20)
    f = qfi.uhlmann_fidelity(fock.to_density(vac), fock.to_density(coh))
    assert f == pytest.approx(math.exp(-0.5), abs=1e-7)
    assert qfi.uhlmann_fidelity(fock.to_density(sp.basis(0)), fock.to_density(sp.basis(1))) \
        == pytest.approx(0.0, abs=1e-12)


def test_bures_second_order_convergence():
    rho0 = _rho(ProbeSpec(Family.Cat, alpha=1.0), 30)
    ref = qfi.qfi_sld(rho0, 0.5)
    errs = [abs(qfi.bures_estimate(rho0, 0.5, s) - ref) for s in (0.08, 0.04, 0.02)]
    assert errs[0] / errs[1] >= 3 and errs[1] / errs[2] >= 3


def test_sensitivity_reference_points():
    coh = _rho(ProbeSpec(Family.Coherent, alpha=1.0))
    sp = FockSpace(30)
    d = qfi.sensitivity(lambda k: channel.apply_closed_form(coh, k), sp.x, 0.5)
    assert math.isfinite(d) and 1 / d ** 2 <= qfi.qfi_kappa(coh, 0.5) * (1 + 1e-3)
    cat = _rho(ProbeSpec(Family.Cat, alpha=1.0))
    d = qfi.sensitivity(lambda k: channel.apply_closed_form(cat, k), cat, 0.3)
    assert math.isfinite(d) and 1 / d ** 2 <= qfi.qfi_kappa(cat, 0.3) * (1 + 1e-3)
    with pytest.raises(ZeroSlope):
        qfi.sensitivity(lambda k: channel.apply_closed_form(cat, k), sp.n, 0.3)
