import os
import subprocess
import sys

import numpy as np
import pytest

from qfeature import _backend, _pykernels
from conftest import random_unitary

BACKENDS = _backend.available()


def _quat_inputs(rng, m=300, k=40):
    nx = rng.normal(size=(m, 3))
    nz = rng.normal(size=(m, 3))
    bx = rng.normal(size=(k, m))
    return nx, nz, bx, np.abs(bx)


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 5, 64, 333])
def test_scan_and_tree_match_sequential(name, n, rng):
    k = _backend.load(name)
    f = random_unitary(rng, n)
    seq = _pykernels.sequential_products(f)
    assert np.max(np.abs(k.scan_products(f) - seq)) <= 1e-12
    assert np.max(np.abs(k.tree_reduce(f) - seq[-1])) <= 1e-12
    assert np.max(np.abs(k.sequential_reduce(f) - seq[-1])) <= 1e-12


@pytest.mark.parametrize("name", BACKENDS)
def test_batched_tree(name, rng):
    k = _backend.load(name)
    f = random_unitary(rng, 4 * 37).reshape(4, 37, 2, 2)
    want = _pykernels.sequential_reduce(f)
    assert np.max(np.abs(k.tree_reduce(f) - want)) <= 1e-12


@pytest.mark.parametrize("name", BACKENDS)
def test_ensemble_tree_matches_sequential(name, rng):
    k = _backend.load(name)
    nx, nz, bx, bz = _quat_inputs(rng)
    a = k.ensemble_quaternions(nx, nz, bx, bz, 0.01)
    b = k.ensemble_quaternions_sequential(nx, nz, bx, bz, 0.01)
    assert np.max(np.abs(a - b)) <= 1e-12
    assert np.allclose(np.sum(a**2, axis=1), 1.0, atol=1e-12)


def test_backends_agree(rng):
    nx, nz, bx, bz = _quat_inputs(rng)
    outs = [_backend.load(n).ensemble_quaternions(nx, nz, bx, bz, 0.01) for n in BACKENDS]
    for o in outs[1:]:
        assert np.max(np.abs(o - outs[0])) <= 1e-12


@pytest.mark.skipif("c" not in BACKENDS, reason="compiled kernels not built")
def test_thread_count_does_not_change_bits(rng):
    k = _backend.load("c")
    nx, nz, bx, bz = _quat_inputs(rng, 256, 64)
    ref = k.ensemble_quaternions(nx, nz, bx, bz, 0.01, 1)
    for t in (2, 3, 8):
        assert np.array_equal(k.ensemble_quaternions(nx, nz, bx, bz, 0.01, t), ref)


def test_zero_noise_gives_identity(rng):
    nx, nz, _, _ = _quat_inputs(rng)
    z = np.zeros((3, nx.shape[0]))
    for n in BACKENDS:
        q = _backend.load(n).ensemble_quaternions(nx, nz, z, z, 0.01)
        assert np.array_equal(q, np.tile([1.0, 0, 0, 0], (3, 1)))


def test_pure_python_switch():
    env = dict(os.environ, QFEATURE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qfeature import _backend; print(_backend.NAME)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
