import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephasim import probes
from dephasim.errors import BracketError, DegenerateState, TruncationError, TruncationWarning
from dephasim.fock import FockSpace
from dephasim.probes import Family, ProbeSpec, build_probe, photon_stats


def cubic_phase_moments(gamma, points=200):
    """<n> and <n^2> of exp(-i gamma x^3)|0> from its wavefunction.

    With psi' = f psi, f = -x - 3i gamma x^2, the number operator acts as a
    multiplication by g(x) = (x^2 - f' - f^2 - 1)/2.
    """
    x, w = np.polynomial.hermite.hermgauss(points)
    w = w / math.sqrt(math.pi)
    f = -x - 3j * gamma * x ** 2
    fp = -1 - 6j * gamma * x
    g = (x ** 2 - fp - f ** 2 - 1) / 2
    return float(np.sum(w * g).real), float(np.sum(w * np.abs(g) ** 2))


def _stats(spec, dim=60):
    return photon_stats(build_probe(FockSpace(dim), spec))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
def test_coherent_moments(alpha):
    s = _stats(ProbeSpec(Family.Coherent, alpha=alpha))
    m = alpha ** 2
    assert s.mean_n == pytest.approx(m, abs=1e-12)
    assert s.mean_n2 == pytest.approx(m ** 2 + m, abs=1e-11)
    assert s.agarwal_q == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.4, 1.0, 2.0])
def test_cat_mean(alpha):
    s = _stats(ProbeSpec(Family.Cat, alpha=alpha))
    assert s.mean_n == pytest.approx(alpha ** 2 * math.tanh(alpha ** 2), abs=1e-11)


def test_kitten_support_and_mean():
    alpha = 1.3
    psi = build_probe(FockSpace(50), ProbeSpec(Family.Kitten, alpha=alpha))
    n = np.arange(50)
    assert np.max(np.abs(psi[n % 4 != 0])) < 1e-13
    # Poisson weights restricted to multiples of four
    pois = np.exp(-alpha ** 2) * alpha ** (2 * n) / np.array([math.factorial(k) for k in n], float)
    pois = np.where(n % 4 == 0, pois, 0.0)
    pois /= pois.sum()
    assert photon_stats(psi).mean_n == pytest.approx(float(pois @ n), abs=1e-12)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
def test_squeezed_vacuum_moments(r):
    s = _stats(ProbeSpec(Family.SqueezedVacuum, r=r), dim=80)
    sh2 = math.sinh(r) ** 2
    assert s.mean_n == pytest.approx(sh2, abs=1e-10)
    assert s.mean_n2 == pytest.approx(3 * sh2 ** 2 + 2 * sh2, abs=1e-10)
    assert s.var_n == pytest.approx(2 * sh2 * (1 + sh2), abs=1e-10)


def test_squeezed_vacuum_r05_value():
    assert _stats(ProbeSpec(Family.SqueezedVacuum, r=0.5)).mean_n2 == pytest.approx(0.764283, abs=1e-6)


@pytest.mark.parametrize("gamma", [0.1, 0.3])
def test_cubic_phase_moments(gamma):
    mean, mean2 = cubic_phase_moments(gamma)
    assert mean == pytest.approx(27 * gamma ** 2 / 8, abs=1e-12)
    dim = probes.adaptive_dim(ProbeSpec(Family.CbPhS, gamma=gamma), max_dim=800)
    s = _stats(ProbeSpec(Family.CbPhS, gamma=gamma), dim=dim)
    assert s.mean_n == pytest.approx(mean, abs=1e-8)
    assert s.mean_n2 == pytest.approx(mean2, rel=1e-7)


def test_cubic_phase_example_value():
    mean, mean2 = cubic_phase_moments(0.3)
    assert mean == pytest.approx(0.30375, abs=1e-12)
    assert mean2 == pytest.approx(1.78516, abs=5e-5)


def test_ss_support():
    psi = build_probe(FockSpace(60), ProbeSpec(Family.SS, r=0.6))
    n = np.arange(60)
    # S(r)|0> + S(-r)|0> cancels the n = 2 mod 4 terms
    assert np.max(np.abs(psi[n % 4 != 0])) < 1e-12


def test_modssw_amplitudes():
    spec = ProbeSpec(Family.ModSSW, s=5, q=1.0, p=1.0)
    psi = build_probe(FockSpace(10), spec)
    ref = np.zeros(10)
    ref[:6] = 1 / np.arange(1, 7)
    np.testing.assert_allclose(psi, ref / np.linalg.norm(ref), atol=1e-15)
    with pytest.warns(TruncationWarning):
        build_probe(FockSpace(4), spec)
    with pytest.raises(TruncationError):
        build_probe(FockSpace(4), spec, strict=True)


def test_fock_state():
    s = _stats(ProbeSpec(Family.Fock, fock_n=3), dim=8)
    assert (s.mean_n, s.mean_n2, s.var_n) == (3.0, 9.0, 0.0)


def test_squeezed_families_pad_away_from_cutoff():
    spec = ProbeSpec(Family.SqCat, alpha=1.0, r=0.5)
    small = build_probe(FockSpace(40), spec)
    big = build_probe(FockSpace(120), spec)[:40]
    big /= np.linalg.norm(big)
    assert np.max(np.abs(small - big)) < 1e-12


def test_truncation_warning_and_strict():
    spec = ProbeSpec(Family.Coherent, alpha=3.0)
    with pytest.warns(TruncationWarning):
        build_probe(FockSpace(8), spec)
    with pytest.raises(TruncationError):
        build_probe(FockSpace(8), spec, strict=True)


def test_degenerate_state(monkeypatch):
    monkeypatch.setattr(probes, "_raw_probe", lambda dim, spec: np.zeros(dim, complex))
    with pytest.raises(DegenerateState):
        build_probe(FockSpace(6), ProbeSpec(Family.Cat, alpha=1.0))


def test_adaptive_dim_certifies_tail():
    spec = ProbeSpec(Family.Coherent, alpha=2.0)
    dim = probes.adaptive_dim(spec)
    psi = build_probe(FockSpace(dim), spec)
    assert probes.tail_mass(psi, dim - 4) < 1e-12
    with pytest.raises(TruncationError):
        probes.adaptive_dim(ProbeSpec(Family.Coherent, alpha=6.0), max_dim=20)


@pytest.mark.parametrize("target", [0.3, 1.0, 1.5])
def test_solve_coherent(target):
    spec = probes.solve_param_for_mean_n(ProbeSpec(Family.Coherent, alpha=1j), target)
    assert abs(spec.alpha) == pytest.approx(math.sqrt(target), abs=1e-7)
    assert complex(spec.alpha).real == pytest.approx(0.0, abs=1e-12)


def test_solve_cat_and_squeezed():
    spec = probes.solve_param_for_mean_n(ProbeSpec(Family.Cat, alpha=1.0), 0.8)
    a2 = abs(spec.alpha) ** 2
    assert a2 * math.tanh(a2) == pytest.approx(0.8, abs=1e-7)
    spec = probes.solve_param_for_mean_n(ProbeSpec(Family.SqueezedVacuum), 0.5)
    assert math.sinh(spec.r) ** 2 == pytest.approx(0.5, abs=1e-7)


def test_solve_cubic_phase_analytic():
    spec = probes.solve_param_for_mean_n(ProbeSpec(Family.CbPhS), 0.30375)
    assert spec.gamma == pytest.approx(0.3, abs=1e-14)


@pytest.mark.parametrize("fam", [Family.SqCat, Family.SSKitten])
def test_solve_squeezed_superpositions(fam):
    spec = probes.solve_param_for_mean_n(ProbeSpec(fam, alpha=1.0, r=0.5), 1.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        s = _stats(spec, dim=probes.adaptive_dim(spec))
    assert s.mean_n == pytest.approx(1.2, abs=1e-7)


def test_solve_errors():
    with pytest.raises(BracketError):
        probes.solve_param_for_mean_n(ProbeSpec(Family.Fock), 1.5)
    assert probes.solve_param_for_mean_n(ProbeSpec(Family.Fock), 2.0).fock_n == 2
    with pytest.raises(BracketError):
        probes.solve_param_for_mean_n(ProbeSpec(Family.ModSSW), 1.0)
    with pytest.raises(BracketError):
        probes.solve_param_for_mean_n(ProbeSpec(Family.Coherent, alpha=1.0), -1.0)


def test_spec_json_roundtrip():
    spec = ProbeSpec(Family.SqCS, alpha=0.5 - 0.25j, r=0.3)
    assert ProbeSpec.from_json(spec.to_json()) == spec
    assert ProbeSpec.from_json('{"family": "Coherent", "alpha": 1}').alpha == 1
    with pytest.raises(ValueError):
        ProbeSpec.from_json({"family": "Coherent", "beta": 1})
    with pytest.raises(ValueError):
        ProbeSpec.from_json({"alpha": 1})
    with pytest.raises(ValueError):
        ProbeSpec(family="Banana")


def test_photon_stats_density_matches_pure():
    psi = build_probe(FockSpace(30), ProbeSpec(Family.Cat, alpha=1.2))
    a = photon_stats(psi)
    b = photon_stats(np.outer(psi, psi.conj()))
    assert a.mean_n2 == pytest.approx(b.mean_n2, abs=1e-13)
    assert math.isnan(photon_stats(FockSpace(4).basis(0)).agarwal_q)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(0.0, 0.6))
def test_squeezed_coherent_normalized_and_decomposed(alpha, r):
    psi = build_probe(FockSpace(60), ProbeSpec(Family.SqCS, alpha=alpha, r=r))
    assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-12)
    s = photon_stats(psi)
    assert s.var_n + s.mean_n ** 2 == pytest.approx(s.mean_n2, abs=1e-12)
