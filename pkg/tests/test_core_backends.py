"""The compiled recursions and the numpy fallback must agree to rounding."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmakit._core import _fallback
from cmakit.carma import CarmaModel

compiled = pytest.importorskip("cmakit._core._recursions")

OU = CarmaModel(a=[1.0], b=[1.0])
CARMA21 = CarmaModel(a=[3.0, 2.0], b=[0.5, 1.0])


def _acvf(model, delta, m):
    return np.ascontiguousarray(model.autocovariance(np.arange(m + 1) * delta))


@pytest.mark.parametrize("model,delta", [(OU, 0.25), (CARMA21, 0.0625)],
                         ids=["ou", "carma21"])
def test_innovations_parity(model, delta):
    gamma = _acvf(model, delta, 220)
    tc, vc = compiled.innovations_recursion(gamma, 200)
    tp, vp = _fallback.innovations_recursion(gamma, 200)
    assert np.max(np.abs(tc - tp)) < 1e-12
    assert np.max(np.abs(vc - vp) / vp) < 1e-12


@pytest.mark.parametrize("model,delta", [(OU, 0.25), (CARMA21, 0.0625)],
                         ids=["ou", "carma21"])
def test_levinson_parity(model, delta):
    gamma = _acvf(model, delta, 300)
    pc, vc = compiled.levinson_recursion(gamma, 256)
    pp, vp = _fallback.levinson_recursion(gamma, 256)
    assert np.max(np.abs(pc - pp)) < 1e-12
    assert abs(vc - vp) / vp < 1e-12


def test_ma_expansion_parity():
    rng = np.random.default_rng(np.random.Philox(key=[12, 0]))
    # a stable AR(24): scale random coefficients until the zeros are outside
    phi = rng.standard_normal(24)
    phi *= 0.5 / np.sum(np.abs(phi))
    bc = compiled.ma_expansion(np.ascontiguousarray(phi), 512)
    bp = _fallback.ma_expansion(np.ascontiguousarray(phi), 512)
    assert_allclose(bc, bp, rtol=0.0, atol=1e-13)


def test_hurwitz_parity():
    rs = np.ascontiguousarray(np.linspace(0.05, 4.0, 80))
    for s in (1.2, 5.0 / 3.0, 2.0, 7.5, 40.0):
        ac = compiled.hurwitz_zeta_array(s, rs)
        ap = _fallback.hurwitz_zeta_array(s, rs)
        assert np.max(np.abs(ac / ap - 1.0)) < 1e-13
        assert compiled.hurwitz_zeta_scalar(s, 1.0) == pytest.approx(
            _fallback.hurwitz_zeta_scalar(s, 1.0), rel=1e-14
        )


def test_innovations_ou_closed_form_both_backends():
    # sampled OU is AR(1): theta_{m,j} -> phi^j in both implementations
    delta = 0.5
    phi = math.exp(-delta)
    gamma = _acvf(OU, delta, 80)
    for impl in (compiled, _fallback):
        theta, v = impl.innovations_recursion(gamma, 60)
        assert_allclose(theta[60, 1:6], phi ** np.arange(1, 6), atol=1e-12)
        assert_allclose(v[60], 0.5 * (1.0 - phi * phi), rtol=1e-10)


def _backend_of(env_value):
    env = dict(os.environ)
    env.pop("CMAKIT_PURE_PYTHON", None)
    if env_value is not None:
        env["CMAKIT_PURE_PYTHON"] = env_value
    out = subprocess.run(
        [sys.executable, "-c", "from cmakit._core import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    return out.stdout.strip()


def test_env_switch_selects_backend():
    assert _backend_of(None) == "compiled"
    assert _backend_of("1") == "python"
