"""Backend selection: the env flag forces the numpy fallback, and both
paths produce identical numbers."""

import json
import os
import subprocess
import sys

import gflowlab


SNIPPET = """
import json
import gflowlab as gf
bowl = gf.solve_bowl(gf.SpeedFunction("bh", 3), 50.0, tol=1e-10)
print(json.dumps({"numba": gf.NUMBA_ENABLED,
                  "zeta10": float(bowl.zeta_at(10.0)),
                  "tip": bowl.tip_curvature}))
"""


def _run(disable):
    env = dict(os.environ)
    env["GFLOWLAB_NO_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_env_flag_selects_backend():
    jit = _run(False)
    plain = _run(True)
    assert jit["numba"] is True
    assert plain["numba"] is False
    # same floating-point operations on both paths: identical results
    assert jit["zeta10"] == plain["zeta10"]
    assert jit["tip"] == plain["tip"]


def test_status_codes_distinct():
    from gflowlab import _accel
    codes = {_accel.STATUS_OK, _accel.STATUS_STOP, _accel.STATUS_CONE,
             _accel.STATUS_UNDERFLOW, _accel.STATUS_BUFFER,
             _accel.STATUS_PINCH, _accel.STATUS_CFL}
    assert len(codes) == 7
