"""Backend parity: the jitted kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from ghz3d import _kernels as k


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv("GHZ3D_NUMBA", "0")
    assert not k.numba_enabled()
    assert k.backend_name() == "numpy"
    monkeypatch.setenv("GHZ3D_NUMBA", "auto")
    assert k.numba_enabled() == k.HAVE_NUMBA


def test_backend_force_numba(monkeypatch):
    if not k.HAVE_NUMBA:
        monkeypatch.setenv("GHZ3D_NUMBA", "1")
        with pytest.raises(RuntimeError):
            k.numba_enabled()
    else:
        monkeypatch.setenv("GHZ3D_NUMBA", "1")
        assert k.numba_enabled()


def test_lr_scan_backends_identical(monkeypatch):
    monkeypatch.setenv("GHZ3D_NUMBA", "0")
    a_np, b_np = k.lr_scan()
    assert a_np.dtype == np.int64 and b_np.dtype == np.int64
    if not k.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    monkeypatch.setenv("GHZ3D_NUMBA", "1")
    a_nb, b_nb = k.lr_scan()
    assert np.array_equal(a_np, a_nb)
    assert np.array_equal(b_np, b_nb)


def test_p4_sums_backends_agree(monkeypatch):
    rng = np.random.default_rng(12)
    n = 24
    weights = rng.uniform(0.1, 1.0, size=n)
    phi = rng.uniform(0.0, 1.0, size=(n, n))
    phi = (phi + phi.T) / 2
    phase = np.exp(-1j * rng.uniform(-3, 3, size=n))
    monkeypatch.setenv("GHZ3D_NUMBA", "0")
    i2_np, cross_np = k.p4_sums(weights, phi, phase)
    if not k.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    monkeypatch.setenv("GHZ3D_NUMBA", "1")
    i2_nb, cross_nb = k.p4_sums(weights, phi, phase)
    assert i2_nb == pytest.approx(i2_np, rel=1e-12)
    assert cross_nb == pytest.approx(cross_np, rel=1e-12)


def test_lr_terms_layout():
    # nine product terms over nine observable slots, prefactors in {0, 1, 2}
    assert len(k.LR_TERMS) == 9
    assert all(len(t) == 4 for t in k.LR_TERMS)
    assert {t[0] for t in k.LR_TERMS} == {0, 1, 2}
    for _, i1, i2, i3 in k.LR_TERMS:
        # one observable per party: slots are 3*op + party
        assert {i1 % 3, i2 % 3, i3 % 3} == {0, 1, 2}
