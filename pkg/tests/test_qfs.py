import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfeature import matcore as mc
from qfeature import noisegen as ng
from qfeature import pulsegen as pg
from qfeature import qfs, qsim
from conftest import random_unitary


def random_params(rng):
    v = rng.normal(size=3)
    return qfs.OtildeParams(*(v / np.linalg.norm(v) * rng.uniform(0, 1)))


def exact_expectations(u, o_tildes):
    return np.array([[qsim.expectation(u, rho, o) for o in o_tildes] for rho in qsim.INITIAL_STATES])


def test_params_read_off():
    assert qfs.params_from_otilde(mc.SIGMA_X).as_array().tolist() == [1, 0, 0]
    assert qfs.params_from_otilde(mc.SIGMA_Y).as_array().tolist() == [0, 1, 0]
    assert qfs.params_from_otilde(mc.SIGMA_Z).as_array().tolist() == [0, 0, 1]
    with pytest.raises(mc.ContractViolation):
        qfs.params_from_otilde(mc.IDENTITY)
    with pytest.raises(mc.ContractViolation):
        qfs.params_from_otilde(np.array([[0, 1], [0, 0]]))


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_params_round_trip_exact(a, b, c):
    p = qfs.OtildeParams(a, b, c)
    assert qfs.params_from_otilde(p.to_matrix()) == p


def test_state_params_examples():
    s = qfs.state_params(mc.IDENTITY, qsim.INITIAL_STATES[4])
    assert (s.a, s.b, s.c) == (1, 0, 0)
    s = qfs.state_params(mc.IDENTITY, qsim.INITIAL_STATES[0])
    assert (s.a, s.b, s.c) == pytest.approx((0.5, 0.5, 0))
    s = qfs.state_params(mc.IDENTITY, qsim.INITIAL_STATES[2])
    assert (s.a, s.b, s.c) == pytest.approx((0.5, 0, 0.5))
    with pytest.raises(mc.ContractViolation):
        qfs.state_params(mc.IDENTITY, 2 * mc.IDENTITY)


def test_state_params_psd(rng):
    for _ in range(50):
        s = qfs.state_params(random_unitary(rng), qsim.INITIAL_STATES[rng.integers(6)])
        assert s.is_psd()


def test_scalar_expectation_examples():
    assert qfs.scalar_expectation(qfs.EvolvedStateParams(1, 0, 0), qfs.OtildeParams(0, 0, 1)) == 1
    assert qfs.scalar_expectation(qfs.EvolvedStateParams(0.5, 0.5, 0), qfs.OtildeParams(1, 0, 0)) == 1


def test_scalar_matches_trace(rng):
    for _ in range(200):
        u = random_unitary(rng)
        rho = qsim.INITIAL_STATES[rng.integers(6)]
        p = random_params(rng)
        s = qfs.state_params(u, rho)
        trace = np.trace(s.to_matrix() @ p.to_matrix()).real
        assert abs(qfs.scalar_expectation(s, p) - trace) <= 1e-12
        assert abs(qfs.scalar_expectation(s, p) - qsim.expectation(u, rho, p.to_matrix())) <= 1e-12


def test_design_matrix_identity():
    a = qfs.design_matrix_for(mc.IDENTITY)
    want = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    assert np.allclose(a, want)


def test_design_matrix_structure(rng):
    for _ in range(100):
        a = qfs.design_matrix_for(random_unitary(rng))
        assert np.allclose(a[0::2], -a[1::2])
        assert np.linalg.matrix_rank(a) == 3


def test_round_trip_extraction(rng):
    for _ in range(200):
        u = random_unitary(rng)
        params = [random_params(rng) for _ in range(3)]
        e = exact_expectations(u, [p.to_matrix() for p in params])
        got, resid = qfs.extract_qfs(e, u, return_residual=True)
        want = np.concatenate([p.as_array() for p in params])
        assert np.max(np.abs(got.features - want)) <= 1e-10
        assert resid <= 1e-8


def test_zero_noise_point():
    g = ng.TimeGrid(1.0, 256)
    cfg = qsim.SimConfig(g, 12.0, 10)
    fld = pg.gaussian_train(pg.cpmg_realistic(g, 1), g)
    p = qfs.simulate_point(cfg, fld, ng.NoiseModel(ng.OneOverF(), scale_factor=0.0), 0)
    assert np.max(np.abs(p.features - qfs.IDENTITY_POINT)) <= 1e-9


def test_zero_operator_point(rng):
    p = qfs.extract_qfs(np.zeros((6, 3)), random_unitary(rng))
    assert not p.features.any()


def test_simulated_residual_small():
    g = ng.TimeGrid(1.0, 256)
    cfg = qsim.SimConfig(g, 12.0, 100)
    fld = pg.gaussian_train(pg.cpmg_ideal(g), g)
    res = qsim.ensemble_otilde(cfg, fld, ng.NoiseModel(ng.OneOverFBump(1.0, 40), scale_factor=3.0), 0)
    p, resid = qfs.extract_qfs(qsim.expectation_set(res), res.u_ctrl_final, return_residual=True)
    assert resid <= 1e-8
    assert np.allclose(p.features, qfs.point_from_otilde(res.o_tilde).features, atol=1e-10)


def test_batch_matches_single(rng):
    u = random_unitary(rng, 20)
    e = rng.uniform(-1, 1, (20, 6, 3))
    batch = qfs.extract_qfs_batch(e, u)
    for i in range(20):
        assert np.allclose(batch[i], qfs.extract_qfs(e[i], u[i]).features, atol=1e-12)
    shared = qfs.extract_qfs_batch(e, u[0])
    assert np.allclose(shared[3], qfs.extract_qfs(e[3], u[0]).features, atol=1e-12)


def test_clipping_is_reporting_only():
    p = qfs.QfsPoint(np.full(9, 1.2))
    assert np.all(p.features == 1.2)
    assert np.all(p.clipped() == 1.0)


def test_csv_round_trip(tmp_path, rng):
    pts = [qfs.QfsPoint(rng.uniform(-1, 1, 9), {"noise": f"n{i}", "seed": i}) for i in range(5)]
    qfs.write_csv(tmp_path / "p.csv", pts, ["noise", "seed"])
    back = qfs.read_csv(tmp_path / "p.csv")
    assert [b.labels["noise"] for b in back] == [p.labels["noise"] for p in pts]
    for a, b in zip(pts, back):
        assert np.array_equal(a.features, b.features)


def test_csv_errors_name_location(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("noise," + ",".join(qfs.FEATURE_NAMES) + "\nx,1,2,3,4,5,6,7,oops,9\n")
    with pytest.raises(ValueError, match=r"row 2, column 'beta_z'"):
        qfs.read_csv(bad)
    short = tmp_path / "short.csv"
    short.write_text("noise," + ",".join(qfs.FEATURE_NAMES) + "\nx,1,2\n")
    with pytest.raises(ValueError, match="row 2"):
        qfs.read_csv(short)
