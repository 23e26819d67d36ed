import json
import os
import subprocess
import sys

from conftest import FIXTURES

PROBE = """
import json
from recsizer import _kernels as K
from recsizer import io as rio
from recsizer.sizing import assemble, solve_bnb
cfg = rio.load_config({cfg!r}, load_series=False)
loads, w, hod = rio.repdays_from_dict(rio.load_json({rd!r}))
s = solve_bnb(assemble(cfg, loads, w, hod), gap_tol=0.0)
print(json.dumps({{"backend": K.BACKEND, "objective": s.objective, "sizing": s.sizing_vector}}))
"""


def _probe(pure):
    code = PROBE.format(cfg=str(FIXTURES / "tiny" / "rec.toml"), rd=str(FIXTURES / "tiny" / "repdays.json"))
    env = dict(os.environ, REC_SIZER_PURE=pure)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_pure_flag_selects_fallback_with_same_answer():
    py = _probe("1")
    assert py["backend"] == "python"
    default = _probe("")
    assert default["backend"] in ("cython", "python")
    assert default["sizing"] == py["sizing"]
    assert abs(default["objective"] - py["objective"]) <= 1e-9
