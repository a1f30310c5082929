import os
import subprocess
import sys

import numpy as np
import pytest

from gdops import _backend, _fallback
from gdops.sampling import random_symmetric

BACKENDS = sorted(_backend.BACKENDS)


def test_compiled_backend_is_built():
    assert "cython" in _backend.BACKENDS, "compiled extension missing; run pip install -e ."


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi_matches_numpy(name, rng):
    impl = _backend.BACKENDS[name]
    for d in (1, 2, 5, 9):
        a = random_symmetric(rng, d)
        diag, vecs, resid, sweeps, ok = impl.jacobi_eigh(a, 1e-12 * max(1.0, np.linalg.norm(a)), 100, True)
        assert ok
        assert np.allclose(np.sort(diag), np.linalg.eigvalsh(a), atol=1e-10)
        assert np.allclose(vecs @ np.diag(diag) @ vecs.T, a, atol=1e-10)


def test_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    py, cy = _backend.BACKENDS["python"], _backend.BACKENDS["cython"]
    lam = rng.standard_normal(6)
    assert np.allclose(py.elementary_all(lam), cy.elementary_all(lam), rtol=1e-13, atol=1e-13)
    for p in (1, 2, 3):
        assert py.pfold_product(lam, p) == pytest.approx(cy.pfold_product(lam, p), rel=1e-12)
    lam3 = rng.random(3)
    assert py.signed_sum_product(2.0, lam3) == pytest.approx(cy.signed_sum_product(2.0, lam3), rel=1e-12)


def test_pfold_and_elementary_hand_values():
    lam = np.array([1.0, 2.0, 3.0])
    assert np.allclose(_fallback.elementary_all(lam), [1, 6, 11, 6])
    assert _fallback.pfold_product(lam, 2) == pytest.approx(60.0)
    assert _fallback.signed_sum_product(2.0, np.array([0.5, 0.0])) == pytest.approx(2.5 * 2.5 * 1.5 * 1.5)


def test_pure_env_selects_python_backend():
    env = dict(os.environ, GDOPS_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import gdops; print(gdops.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
