"""Backend selection and numpy/numba kernel parity."""

import os
import subprocess
import sys

import numpy as np
import pytest

from desing import backend
from desing._kernels_numpy import (apply_metric_slot, christoffel_flat,
                                   contract_full_flat, covd_correction_flat,
                                   norm_sq_flat)

needs_numba = pytest.mark.skipif(not backend.HAS_NUMBA,
                                 reason="numba not importable")


@pytest.fixture
def restore_backend():
    name = backend.active_backend()
    yield
    backend.set_backend(name)


def _flat_inputs(m, npts, seed):
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((npts, m, m))
    g = np.einsum("pij,pkj->pik", base, base) + 3.0 * np.eye(m)
    ginv = np.linalg.inv(g)
    dg = rng.standard_normal((npts, m, m, m))
    dg = 0.5 * (dg + np.swapaxes(dg, 1, 2))
    return g, ginv, dg, rng


def test_set_backend_rejects_unknown(restore_backend):
    with pytest.raises(ValueError):
        backend.set_backend("fortran")
    backend.set_backend("numpy")
    assert backend.active_backend() == "numpy"
    assert backend.kernels().__name__.endswith("_kernels_numpy")


def test_available_backends_listing():
    names = backend.available_backends()
    assert names[0] == "numpy"
    if backend.HAS_NUMBA:
        assert "numba" in names


@needs_numba
def test_kernel_parity_one_dimensional_is_bitwise(restore_backend):
    # With m = 1 every contraction is a single-term sum, so both backends
    # perform literally the same scalar arithmetic.
    from desing import _kernels_numba as knb
    g, ginv, dg, rng = _flat_inputs(1, 40, 0)
    a = rng.standard_normal((40, 1, 1))
    b = rng.standard_normal((40, 1, 1))
    assert np.array_equal(contract_full_flat(a, b, 1, 1, 1, 1, 1),
                          knb.contract_full_flat(a, b, 1, 1, 1, 1, 1))
    gam_np = christoffel_flat(ginv, dg)
    gam_nb = knb.christoffel_flat(ginv, dg)
    assert np.array_equal(gam_np, gam_nb)
    flat = rng.standard_normal((40, 1))
    assert np.array_equal(norm_sq_flat(flat, g, ginv, 1, 1, 0),
                          knb.norm_sq_flat(flat, g, ginv, 1, 1, 0))
    assert np.array_equal(covd_correction_flat(flat, gam_np, 1, 1, 0),
                          knb.covd_correction_flat(flat, gam_np, 1, 1, 0))


@needs_numba
@pytest.mark.parametrize("m", [2, 3])
def test_kernel_parity_multi_dimensional(restore_backend, m):
    from desing import _kernels_numba as knb
    g, ginv, dg, rng = _flat_inputs(m, 25, m)
    tol = dict(rtol=1e-13, atol=1e-13)

    gam_np = christoffel_flat(ginv, dg)
    gam_nb = knb.christoffel_flat(ginv, dg)
    np.testing.assert_allclose(gam_nb, gam_np, **tol)
    # Symmetry in the lower pair holds for both.
    np.testing.assert_allclose(gam_nb, np.swapaxes(gam_nb, 2, 3), **tol)

    for s1, t1 in ((1, 0), (0, 1), (1, 1)):
        for s2, t2 in ((0, 0), (1, 0), (1, 1)):
            a = rng.standard_normal((25, m**(s2 + t1), m**(t2 + s1)))
            b = rng.standard_normal((25, m**s1, m**t1))
            np.testing.assert_allclose(
                knb.contract_full_flat(a, b, m, s2, t2, s1, t1),
                contract_full_flat(a, b, m, s2, t2, s1, t1), **tol)

    for sigma, tau in ((0, 0), (1, 0), (0, 2), (1, 1), (2, 1)):
        flat = rng.standard_normal((25, m**(sigma + tau)))
        np.testing.assert_allclose(
            knb.norm_sq_flat(flat, g, ginv, m, sigma, tau),
            norm_sq_flat(flat, g, ginv, m, sigma, tau), **tol)
        np.testing.assert_allclose(
            knb.covd_correction_flat(flat, gam_np, m, sigma, tau),
            covd_correction_flat(flat, gam_np, m, sigma, tau), **tol)

    mat = rng.standard_normal((25, m, m))
    arr = rng.standard_normal((25, m**3))
    for pos in range(3):
        np.testing.assert_allclose(
            knb.apply_metric_slot(arr, mat, m, pos, 3),
            apply_metric_slot(arr, mat, m, pos, 3), **tol)


@needs_numba
def test_solver_results_agree_across_backends(restore_backend):
    from desing.problem_io import ProblemConfig
    from desing.registry import cusp_problem_doc
    from desing.solver import solve_ibvp
    doc = cusp_problem_doc(1.0, 33, 8, 0.5, mode="direct")
    finals = {}
    for name in backend.available_backends():
        backend.set_backend(name)
        finals[name] = solve_ibvp(ProblemConfig.from_dict(doc).build()).final
    np.testing.assert_allclose(finals["numba"], finals["numpy"],
                               rtol=1e-12, atol=1e-14)


def test_warmup_is_safe_on_any_backend(restore_backend):
    backend.set_backend("numpy")
    backend.warmup()
    if backend.HAS_NUMBA:
        backend.set_backend("numba")
        backend.warmup()


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("", "auto")])
def test_env_flag_selects_backend(flag, expected):
    code = ("import desing.backend as b; print(b.active_backend())")
    env = dict(os.environ)
    if flag:
        env["DESING_NUMBA"] = flag
    else:
        env.pop("DESING_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    got = out.stdout.strip()
    if expected == "auto":
        assert got == ("numba" if backend.HAS_NUMBA else "numpy")
    else:
        assert got == expected


def test_env_flag_one_requires_numba():
    code = ("import desing.backend as b; print(b.active_backend())")
    env = dict(os.environ)
    env["DESING_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    if backend.HAS_NUMBA:
        assert out.returncode == 0
        assert out.stdout.strip() == "numba"
    else:
        assert out.returncode != 0
