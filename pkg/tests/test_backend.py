import json
import os
import subprocess
import sys

import numpy as np
import pytest

SCRIPT = r"""
import json, numpy as np
from hetlab import BACKEND
from hetlab.kernels import kernel_catalog, p_power
from hetlab.potentials import p_double_well
from hetlab.cauchy import solve_cauchy
t = np.logspace(-3, 1, 30)
vals = {k.kind + str(k.params): [k.Phi(t).tolist(), k.G(t).tolist(),
                                  k.G_inv(t).tolist()] for k in kernel_catalog()[:6]}
prof = solve_cauchy(p_power(2), p_double_well(2, 2))
print(json.dumps({"backend": BACKEND, "vals": vals, "q": prof.q.tolist()}))
"""


def _run(backend):
    env = dict(os.environ, HETLAB_BACKEND=backend)
    r = subprocess.run([sys.executable, "-c", SCRIPT], env=env,
                       capture_output=True, text=True, timeout=600)
    assert r.returncode == 0, r.stderr
    return json.loads(r.stdout)


@pytest.mark.slow
def test_numpy_and_numba_backends_agree():
    a, b = _run("numba"), _run("numpy")
    assert a["backend"] == "numba" and b["backend"] == "numpy"
    for key in a["vals"]:
        np.testing.assert_allclose(a["vals"][key], b["vals"][key], rtol=1e-13, atol=1e-300)
    np.testing.assert_allclose(a["q"], b["q"], rtol=0, atol=1e-13)


def test_bad_backend_value():
    env = dict(os.environ, HETLAB_BACKEND="fortran")
    r = subprocess.run([sys.executable, "-c", "import hetlab"], env=env,
                       capture_output=True, text=True)
    assert r.returncode != 0 and "HETLAB_BACKEND" in r.stderr
