import os
import subprocess
import sys

import numpy as np
import pytest

import openqbm
from openqbm import _backend, _fallback

core = pytest.importorskip("openqbm._core", reason="compiled core not built")


def test_default_backend_is_compiled():
    assert _backend.NAME == openqbm.BACKEND == "cython"


def test_environment_forces_fallback():
    env = dict(os.environ, OPENQBM_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import openqbm; print(openqbm.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("flags", [(True, True, True, True), (False, False, True, True),
                                   (True, False, False, True), (False, True, False, False)])
def test_cl_rhs_agree(flags, rng):
    n = 23
    rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    phi = np.linspace(-3.0, 3.0, n)
    v = 0.3 * phi**4 - phi**2
    args = (rho, v, phi, phi[1] - phi[0], 0.17, 1.3) + flags
    fast, slow = core.cl_rhs(*args), _fallback.cl_rhs(*args)
    assert np.allclose(fast, slow, rtol=1e-13, atol=1e-13 * np.max(np.abs(slow)))


@pytest.mark.parametrize("flags", [(True,) * 5, (False, True, False, True, False),
                                   (True, False, True, False, True)])
def test_transport_rhs_agree(flags, rng):
    n_phi, n_pi = 19, 15
    w = rng.normal(size=(n_phi, n_pi))
    phi = np.linspace(-2.0, 2.0, n_phi)
    dpi = 0.4
    pi = dpi * (np.arange(n_pi) - n_pi // 2)
    args = (w, pi, phi[1] - phi[0], dpi, phi**3 - phi, 6 * phi, 0.3, 0.8) + flags
    fast, slow = core.transport_rhs(*args), _fallback.transport_rhs(*args)
    assert np.allclose(fast, slow, rtol=1e-12, atol=1e-12 * np.max(np.abs(slow)))
