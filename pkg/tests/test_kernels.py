"""Backend parity: the compiled kernels must agree with the pure fallback."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pg3flows._kernels import fastback, pyback

BACKENDS = [pyback, fastback]

finite4 = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=4, max_size=4
).map(np.array)


def _rng():
    return np.random.default_rng(42)


def test_backend_names():
    assert pyback.NAME == "python"
    assert fastback.NAME == "cython"


@pytest.mark.parametrize("n", range(50))
def test_quaternion_ops_match(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal(4)
    b = rng.standard_normal(4)
    np.testing.assert_allclose(pyback.quat_mul(a, b), fastback.quat_mul(a, b),
                               atol=1e-14)
    np.testing.assert_allclose(pyback.quat_conj(a), fastback.quat_conj(a))
    np.testing.assert_allclose(pyback.quat_inv(a), fastback.quat_inv(a),
                               atol=1e-14)


def test_plucker_kernels_match():
    rng = _rng()
    for _ in range(100):
        u = rng.standard_normal(4)
        v = rng.standard_normal(4)
        pp = pyback.plucker_from_frame(u, v)
        pf = fastback.plucker_from_frame(u, v)
        np.testing.assert_allclose(pp, pf, atol=1e-14)
        q = rng.standard_normal(6)
        assert pyback.klein_form(q) == pytest.approx(fastback.klein_form(q))
        r = rng.standard_normal(6)
        assert pyback.plucker_pairing(q, r) == pytest.approx(
            fastback.plucker_pairing(q, r))


@given(finite4)
@settings(max_examples=100, deadline=None)
def test_sign_canonical_match(v):
    if not np.any(v):
        v = v + 1.0
    np.testing.assert_array_equal(pyback.sign_canonical(v),
                                  fastback.sign_canonical(v))


@given(finite4)
@settings(max_examples=50, deadline=None)
def test_sign_canonical_idempotent(v):
    if not np.any(v):
        v = v + 1.0
    once = pyback.sign_canonical(v)
    np.testing.assert_array_equal(once, pyback.sign_canonical(once))


def test_orthonormalize_match():
    rng = _rng()
    for _ in range(100):
        u = rng.standard_normal(4)
        v = rng.standard_normal(4)
        up, vp, okp = pyback.orthonormalize_pair(u, v)
        uf, vf, okf = fastback.orthonormalize_pair(u, v)
        assert okp == okf
        np.testing.assert_allclose(up, uf, atol=1e-14)
        np.testing.assert_allclose(vp, vf, atol=1e-14)


def test_orthonormalize_degenerate():
    u = np.array([1.0, 0.0, 0.0, 0.0])
    for backend in BACKENDS:
        _, _, ok = backend.orthonormalize_pair(u, 2.0 * u)
        assert not ok
        _, _, ok = backend.orthonormalize_pair(np.zeros(4), u)
        assert not ok


def test_distance_kernels_match():
    rng = _rng()
    for _ in range(100):
        f = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        g = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        assert pyback.frame_distance(f, g) == pytest.approx(
            fastback.frame_distance(f, g), abs=1e-14)
        x = rng.standard_normal(4)
        x /= np.linalg.norm(x)
        y = rng.standard_normal(4)
        y /= np.linalg.norm(y)
        assert pyback.chordal_point_distance(x, y) == pytest.approx(
            fastback.chordal_point_distance(x, y), abs=1e-14)


def test_distance_kernels_resolve_tiny_gaps():
    # the metrics must resolve perturbations far below sqrt(machine eps)
    f = np.eye(4)[:, :2]
    g = np.linalg.qr(f + 1e-12 * np.ones((4, 2)))[0]
    for backend in BACKENDS:
        d = backend.frame_distance(f, g)
        assert 1e-13 < d < 1e-11
    x = np.array([1.0, 0.0, 0.0, 0.0])
    y = np.array([1.0, 1e-12, 0.0, 0.0])
    y /= np.linalg.norm(y)
    for backend in BACKENDS:
        d = backend.chordal_point_distance(x, y)
        assert d == pytest.approx(1e-12, rel=1e-3)


def test_apply_to_frame_match():
    rng = _rng()
    for _ in range(50):
        m = rng.standard_normal((4, 4))
        f = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        fp, cp, okp = pyback.apply_to_frame(m, f)
        ff, cf, okf = fastback.apply_to_frame(m, f)
        assert okp == okf
        assert cp == pytest.approx(cf)
        np.testing.assert_allclose(fp, ff, atol=1e-12)


def test_pure_python_env_override(monkeypatch):
    import importlib
    import pg3flows._kernels as kernels

    monkeypatch.setenv("PG3FLOWS_PURE_PYTHON", "1")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
    finally:
        monkeypatch.delenv("PG3FLOWS_PURE_PYTHON")
        importlib.reload(kernels)
