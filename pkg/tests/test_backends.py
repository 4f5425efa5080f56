"""Parity tests between the compiled kernels and the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from mapfit import _backend
from mapfit import _kernels_py as py_kernels
from mapfit.grid import gaussian_kernel

compiled = pytest.importorskip(
    "mapfit._kernels", reason="compiled extension not built")


# ---------------------------------------------------------------------------
# Backend selection
# ---------------------------------------------------------------------------

def test_backend_names():
    assert py_kernels.BACKEND_NAME == "python"
    assert compiled.BACKEND_NAME == "compiled"
    assert _backend.BACKEND in ("compiled", "python")


def test_environment_variable_forces_the_fallback():
    script = "from mapfit import _backend; print(_backend.BACKEND)"
    env = dict(os.environ, MAPFIT_PURE_PYTHON="1")
    result = subprocess.run([sys.executable, "-c", script], env=env,
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == "python"

    env.pop("MAPFIT_PURE_PYTHON")
    result = subprocess.run([sys.executable, "-c", script], env=env,
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == "compiled"


def test_both_backends_expose_the_same_surface():
    names = ("blur_3d", "laplacian_3d", "overlap_dot", "sa_minimize",
             "brute_force_min")
    for name in names:
        assert callable(getattr(compiled, name))
        assert callable(getattr(py_kernels, name))


# ---------------------------------------------------------------------------
# Kernel parity
# ---------------------------------------------------------------------------

def test_blur_parity():
    rng = np.random.default_rng(0)
    values = rng.normal(size=(9, 8, 7))
    for sigma_vox in (0.6, 1.87):
        taps = gaussian_kernel(sigma_vox)
        np.testing.assert_allclose(compiled.blur_3d(values, taps),
                                   py_kernels.blur_3d(values, taps),
                                   rtol=0, atol=1e-13)


def test_blur_impulse_is_the_separable_kernel():
    taps = gaussian_kernel(1.0)
    r = taps.shape[0] // 2
    n = 2 * r + 3
    values = np.zeros((n, n, n))
    values[n // 2, n // 2, n // 2] = 1.0
    expected = np.einsum("i,j,k->ijk", taps, taps, taps)
    for impl in (compiled, py_kernels):
        out = impl.blur_3d(values, taps)
        core = out[n // 2 - r:n // 2 + r + 1, n // 2 - r:n // 2 + r + 1,
                   n // 2 - r:n // 2 + r + 1]
        np.testing.assert_allclose(core, expected, atol=1e-15)


def test_laplacian_parity():
    rng = np.random.default_rng(1)
    values = rng.normal(size=(10, 9, 8))
    np.testing.assert_allclose(compiled.laplacian_3d(values),
                               py_kernels.laplacian_3d(values),
                               rtol=0, atol=1e-13)


def test_overlap_parity_across_offsets():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(6, 5, 4))
    b = rng.normal(size=(4, 5, 6))
    offsets = [(0, 0, 0), (1, -2, 3), (-3, 0, 1), (5, 0, 0), (6, 0, 0),
               (-4, 0, 0), (2, 5, -6)]
    for offset in offsets:
        off = np.asarray(offset, dtype=np.int64)
        got_c = compiled.overlap_dot(a, b, off)
        got_py = py_kernels.overlap_dot(a, b, off)
        assert got_c == pytest.approx(got_py, rel=1e-13, abs=1e-15)


def test_overlap_disjoint_is_zero_in_both():
    a = np.ones((3, 3, 3))
    b = np.ones((3, 3, 3))
    off = np.asarray([10, 0, 0], dtype=np.int64)
    assert compiled.overlap_dot(a, b, off) == 0.0
    assert py_kernels.overlap_dot(a, b, off) == 0.0


def test_sa_parity_with_shared_random_streams():
    rng = np.random.default_rng(3)
    m, N = 2, 3
    n = m * N
    Q = rng.normal(size=(n, n))
    Q = 0.5 * (Q + Q.T)
    Q[:N, :N] = 0.0
    Q[N:, N:] = 0.0
    b = rng.normal(size=n)
    y0 = np.full(n, 1.0 / N)
    iters = 500
    draw = np.random.default_rng(11)
    normals = draw.normal(size=(iters, n))
    uniforms = draw.uniform(size=iters)
    args = (Q, b, m, N, y0, 10.0, 0.95, 1.0, iters, normals, uniforms, False)
    y_c, f_c, acc_c = compiled.sa_minimize(*args)
    y_p, f_p, acc_p = py_kernels.sa_minimize(*args)
    assert acc_c == acc_p
    assert f_c == pytest.approx(f_p, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(y_c, y_p, atol=1e-12)


def test_sa_zero_iterations_returns_the_start_in_both():
    Q = np.zeros((2, 2))
    b = np.array([1.0, 0.0])
    y0 = np.array([0.25, 0.75])
    empty_n = np.zeros((0, 2))
    empty_u = np.zeros(0)
    for impl in (compiled, py_kernels):
        y, f, accepted = impl.sa_minimize(Q, b, 1, 2, y0, 5.0, 0.9, 0.0, 0,
                                          empty_n, empty_u, False)
        np.testing.assert_allclose(y, y0)
        assert f == pytest.approx(-0.25)
        assert accepted == 0


def test_brute_force_parity():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        m, N = 2, 4
        n = m * N
        Q = rng.normal(size=(n, n))
        Q = 0.5 * (Q + Q.T)
        Q[:N, :N] = 0.0
        Q[N:, N:] = 0.0
        b = rng.normal(size=n)
        idx_c, obj_c = compiled.brute_force_min(Q, b, m, N)
        idx_p, obj_p = py_kernels.brute_force_min(Q, b, m, N)
        np.testing.assert_array_equal(idx_c, idx_p)
        assert obj_c == pytest.approx(obj_p, rel=1e-13)


def test_brute_force_ties_pick_the_lexicographically_smallest():
    m, N = 3, 3
    n = m * N
    Q = np.zeros((n, n))
    b = np.zeros(n)
    for impl in (compiled, py_kernels):
        idx, obj = impl.brute_force_min(Q, b, m, N)
        np.testing.assert_array_equal(idx, [0, 0, 0])
        assert obj == 0.0


def test_kernels_accept_read_only_inputs():
    rng = np.random.default_rng(4)
    values = rng.normal(size=(6, 6, 6))
    values.setflags(write=False)
    taps = gaussian_kernel(1.0)
    taps.setflags(write=False)
    for impl in (compiled, py_kernels):
        impl.blur_3d(values, taps)
        impl.laplacian_3d(values)


# ---------------------------------------------------------------------------
# End-to-end equivalence
# ---------------------------------------------------------------------------

def test_solver_cli_agrees_across_backends(tmp_path):
    from mapfit import formats
    from conftest import make_random_problem

    problem = make_random_problem(2, 3, seed=9)
    path = tmp_path / "parity.prob"
    formats.write_prob(path, problem.m, problem.N, 0, problem.Q, problem.b)

    def run(env_extra):
        env = dict(os.environ, **env_extra)
        result = subprocess.run(
            [sys.executable, "-m", "mapfit.cli", "solve",
             "--problem", str(path), "--method", "sa", "--iters", "300"],
            env=env, capture_output=True, text=True)
        assert result.returncode == 0, result.stderr
        return [line for line in result.stdout.splitlines()
                if not line.startswith("wall_time=")
                and "," not in line]  # drop the CSV block (wall time varies)

    with_compiled = run({})
    pure_python = run({"MAPFIT_PURE_PYTHON": "1"})
    assert with_compiled == pure_python
