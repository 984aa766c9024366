import json

import numpy as np
import pytest

from qfeature import _backend
from qfeature import matcore as mc
from qfeature import noisegen as ng
from qfeature import pulsegen as pg
from qfeature import qsim
from conftest import random_unitary

GRID = ng.TimeGrid(1.0, 256)
CFG = qsim.SimConfig(GRID, omega=12.0, realisations=200)


def zero_noise(m):
    return ng.NoiseRealization.from_x(np.zeros(m))


def ideal_field(grid=GRID):
    return pg.gaussian_train(pg.cpmg_ideal(grid), grid)


def test_free_evolution_hamiltonians():
    hc, hn = qsim.step_hamiltonians(pg.ControlField.zeros(GRID), zero_noise(256), CFG)
    assert np.allclose(hc, 6.0 * mc.SIGMA_Z)
    assert not hn.any()


def test_direct_substitution():
    g = ng.TimeGrid(1.0, 2)
    fld = pg.ControlField(np.array([np.pi, 0.0]))
    noise = ng.NoiseRealization.from_x([0.3, 0.0])
    cfg = qsim.SimConfig(g, omega=12.0, realisations=1)
    hc, hn = qsim.step_hamiltonians(fld, noise, cfg)
    want = 6.0 * mc.SIGMA_Z + np.pi / 2 * mc.SIGMA_X + 0.3 * mc.SIGMA_X + 0.3 * mc.SIGMA_Z
    assert np.allclose(hc[0] + hn[0], want)
    assert mc.is_hermitian(hc, 1e-12) and mc.is_hermitian(hn, 1e-12)


def test_length_mismatch():
    with pytest.raises(ValueError):
        qsim.step_hamiltonians(pg.ControlField.zeros(GRID), zero_noise(10), CFG)


def test_constant_control_unitaries():
    dt = GRID.dt
    hc = np.broadcast_to(6.0 * mc.SIGMA_Z, (256, 2, 2))
    u = qsim.control_unitaries(hc, dt)
    j = np.arange(256)
    phase = 6.0 * (j + 1) * dt
    want = np.zeros((256, 2, 2), dtype=complex)
    want[:, 0, 0] = np.exp(-1j * phase)
    want[:, 1, 1] = np.exp(1j * phase)
    assert np.max(np.abs(u - want)) <= 1e-10


def test_single_step_control():
    h = np.array([[[1.0, 0.5], [0.5, -1.0]]], dtype=complex)
    assert np.allclose(qsim.control_unitaries(h, 0.1)[0], mc.expm_skew(h[0], 0.1))


def test_control_scan_matches_sequential():
    fld = pg.gaussian_train(pg.cpmg_realistic(GRID, 4), GRID)
    hc, _ = qsim.step_hamiltonians(fld, zero_noise(256), CFG)
    f = mc.expm_skew(hc, GRID.dt)
    seq = mc.sequential_fold(f)
    u = qsim.control_unitaries(hc, GRID.dt)
    assert np.max(np.linalg.norm(u - seq, axis=(1, 2))) <= 1e-12
    assert mc.is_unitary(u)


def test_interaction_unitary_zero_noise():
    hc, hn = qsim.step_hamiltonians(ideal_field(), zero_noise(256), CFG)
    u = qsim.control_unitaries(hc, GRID.dt)
    assert np.allclose(qsim.interaction_unitary(u, hn, GRID.dt), mc.IDENTITY, atol=1e-15)


def test_interaction_unitary_commuting_case(rng):
    bz = rng.normal(size=256)
    noise = ng.NoiseRealization(np.zeros(256), bz)
    hc, hn = qsim.step_hamiltonians(pg.ControlField.zeros(GRID), noise, CFG)
    u = qsim.control_unitaries(hc, GRID.dt)
    got = qsim.interaction_unitary(u, hn, GRID.dt)
    phi = bz.sum() * GRID.dt
    assert np.allclose(got, np.diag([np.exp(-1j * phi), np.exp(1j * phi)]), atol=1e-10)


def test_quaternion_path_matches_matrix_path():
    fld = pg.gaussian_train(pg.cpmg_realistic(GRID, 2), GRID)
    noise = ng.synthesize_ensemble(ng.NoiseModel(ng.OneOverFBump(1.0, 60), scale_factor=3.0), GRID, 1, 5)
    hc, hn = qsim.step_hamiltonians(fld, noise, CFG)
    u = qsim.control_unitaries(hc, GRID.dt)
    mat = qsim.interaction_unitary(u, hn, GRID.dt)
    for name in _backend.available():
        quat = qsim.ensemble_interaction_unitaries(u, noise, GRID.dt, backend=_backend.load(name))
        assert np.max(np.abs(quat - mat)) <= 1e-12


def _trotter_errors(ms):
    errs = []
    for m in ms:
        g = ng.TimeGrid(1.0, m)
        cfg = qsim.SimConfig(g, 12.0, 1)
        fld = pg.gaussian_train(pg.cpmg_ideal(g), g)
        t = g.times
        bx = 2.0 * np.cos(2 * np.pi * 3 * t + 0.4) + 1.5 * np.sin(2 * np.pi * 7 * t)
        errs.append(qsim.decomposition_error(fld, ng.NoiseRealization.from_x(bx), cfg))
    return np.array(errs)


def test_decomposition_error_halves():
    # first-order Trotter: past the pre-asymptotic range the error halves
    errs = _trotter_errors([1024, 2048, 4096])
    ratios = errs[:-1] / errs[1:]
    assert np.all(ratios > 1.8) and np.all(ratios < 2.6)


def test_modified_interaction_unitary(rng):
    uc = random_unitary(rng)
    ui = random_unitary(rng)
    assert np.allclose(qsim.modified_interaction_unitary(uc, mc.IDENTITY), mc.IDENTITY)
    assert np.allclose(qsim.modified_interaction_unitary(mc.IDENTITY, ui), ui)
    for _ in range(100):
        uc, ui = random_unitary(rng), random_unitary(rng)
        ut = qsim.modified_interaction_unitary(uc, ui)
        assert np.linalg.norm(uc @ ui - ut @ uc) <= 1e-12
        assert mc.is_unitary(ut, 1e-12)


def test_zero_noise_otilde_is_observable():
    m = ng.NoiseModel(ng.OneOverF(), scale_factor=0.0)
    r = qsim.ensemble_otilde(CFG, ideal_field(), m, 0)
    for o, ot in zip(qsim.OBSERVABLES, r.o_tilde):
        assert np.allclose(ot, o, atol=1e-12)


def test_single_realisation_spectrum():
    cfg = qsim.SimConfig(GRID, 12.0, 1)
    r = qsim.ensemble_otilde(cfg, ideal_field(), ng.NoiseModel(ng.OneOverF(), scale_factor=5.0), 3)
    for ot in r.o_tilde:
        assert np.allclose(np.linalg.eigvalsh(ot), [-1, 1], atol=1e-12)


def test_saturation_shrinks_operator():
    def norms(s):
        m = ng.NoiseModel(ng.ColoredGaussian(4), scale_factor=s)
        return np.linalg.norm(qsim.ensemble_otilde(CFG, ideal_field(), m, 1).o_tilde, axis=(1, 2))

    assert np.all(norms(1.75) < norms(0.25))


def test_otilde_invariants_and_unitarity():
    m = ng.NoiseModel(ng.OneOverFBump(0.8, 30), stationary=False, envelope_peak_fraction=0.3, scale_factor=4)
    r = qsim.ensemble_otilde(CFG, ideal_field(), m, 2)
    assert mc.is_unitary(r.u_ctrl_final)
    assert mc.is_unitary(r.u_tilde_I)
    for ot in r.o_tilde:
        assert mc.is_hermitian(ot)
        assert abs(np.trace(ot)) <= 1e-9
        ev = np.linalg.eigvalsh(ot)
        assert ev.min() >= -1 - 1e-9 and ev.max() <= 1 + 1e-9


def test_determinism_across_threads_and_chunks():
    m = ng.NoiseModel(ng.OneOverF())
    base = qsim.ensemble_otilde(qsim.SimConfig(GRID, 12.0, 100, nthreads=1), ideal_field(), m, 5)
    for cfg in (qsim.SimConfig(GRID, 12.0, 100, nthreads=4), qsim.SimConfig(GRID, 12.0, 100, chunk=7)):
        r = qsim.ensemble_otilde(cfg, ideal_field(), m, 5)
        assert np.array_equal(r.o_tilde, base.o_tilde)


def test_pairwise_sum_order_fixed(rng):
    a = rng.normal(size=(37, 3))
    assert np.allclose(qsim.pairwise_sum(a), a.sum(0))
    assert np.array_equal(qsim.pairwise_sum(a), qsim.pairwise_sum(a.copy()))


def test_single_precision_flag():
    m = ng.NoiseModel(ng.OneOverF())
    d = qsim.ensemble_otilde(CFG, ideal_field(), m, 5)
    s = qsim.ensemble_otilde(qsim.SimConfig(GRID, 12.0, 200, precision="single"), ideal_field(), m, 5)
    assert np.allclose(s.o_tilde, d.o_tilde, atol=1e-4)


def test_expectation_examples(rng):
    z_plus = qsim.INITIAL_STATES[4]
    assert qsim.expectation(mc.IDENTITY, z_plus, mc.SIGMA_Z) == pytest.approx(1.0)
    for rho in qsim.INITIAL_STATES:
        assert qsim.expectation(random_unitary(rng), rho, np.zeros((2, 2))) == 0.0
    with pytest.raises(mc.ContractViolation):
        qsim.expectation(mc.IDENTITY, np.eye(2), mc.SIGMA_Z)


def test_direct_expectation_zero_noise():
    fld = ideal_field()
    m = ng.NoiseModel(ng.OneOverF(), scale_factor=0.0)
    cfg = qsim.SimConfig(GRID, 12.0, 3)
    hc, _ = qsim.step_hamiltonians(fld, zero_noise(256), cfg)
    u = qsim.control_unitaries(hc, GRID.dt)[-1]
    rho = qsim.INITIAL_STATES[0]
    want = np.trace(u @ rho @ mc.dagger(u) @ mc.SIGMA_Y).real
    assert qsim.direct_expectation(cfg, fld, m, rho, mc.SIGMA_Y, 0) == pytest.approx(want, abs=1e-9)


def test_commuting_dephasing_keeps_populations():
    cfg = qsim.SimConfig(GRID, 12.0, 20)
    bz = np.abs(ng.synthesize_x(ng.NoiseModel(ng.OneOverF()), GRID, 0, np.arange(20)))
    noise = ng.NoiseRealization(np.zeros_like(bz), bz)
    u = qsim.total_unitaries(pg.ControlField.zeros(GRID), noise, cfg)
    rho = qsim.INITIAL_STATES[4]
    vals = np.trace(u @ rho @ mc.dagger(u) @ mc.SIGMA_Z, axis1=1, axis2=2).real
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_direct_matches_decomposition():
    cfg = qsim.SimConfig(GRID, 12.0, 500)
    fld = ideal_field()
    m = ng.NoiseModel(ng.ColoredGaussian(8), scale_factor=3.0)
    r = qsim.ensemble_otilde(cfg, fld, m, 8)
    for i, rho in enumerate(qsim.INITIAL_STATES):
        for o, ot in zip(qsim.OBSERVABLES, r.o_tilde):
            d, se = qsim.direct_expectation(cfg, fld, m, rho, o, 8, return_stderr=True)
            assert abs(d - qsim.expectation(r.u_ctrl_final, rho, ot)) <= max(3 * se, 0.02)


def test_json_export(tmp_path):
    r = qsim.ensemble_otilde(CFG, ideal_field(), ng.NoiseModel(ng.OneOverF()), 0)
    p = tmp_path / "r.json"
    r.to_json(p)
    d = json.loads(p.read_text())
    assert np.array_equal(qsim.mat_from_list(d["o_tilde"]["x"]), r.o_tilde[0])
    assert d["metadata"]["master_seed"] == 0
    assert len(d["metadata"]["config_hash"]) == 16
