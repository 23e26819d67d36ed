"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python benchmarks/bench_kernels.py --solve    # also time whole solves per backend

Whole-solve timings run in a subprocess per backend, since the backend is
picked once at import (REC_SIZER_PURE=1 forces the fallback).
"""

import argparse
import json
import os
import subprocess
import sys
import timeit
from pathlib import Path

import numpy as np

from recsizer import _kernels as K

ROOT = Path(__file__).resolve().parents[1]


def _etas(rng, m, count, nnz):
    rows = rng.integers(0, m, count).astype(np.int64)
    piv = rng.uniform(0.5, 2.0, count)
    lens = np.full(count, nnz)
    starts = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
    idx = rng.integers(0, m, int(lens.sum())).astype(np.int64)
    vals = rng.normal(0, 1, idx.size)
    return rows, piv, starts, idx, vals, count


def cases(rng):
    m = 6000
    etas = _etas(rng, m, 60, 40)
    v = rng.normal(0, 1, m)
    # simplex-like pricing input: mostly basic or nonbasic at a bound with the
    # right sign, a few percent of improving candidates
    n = 10000
    vstat = np.where(rng.random(n) < 0.6, K.AT_LOWER, K.BASIC).astype(np.int8)
    d = np.where(vstat == K.BASIC, 0.0, rng.exponential(1.0, n))
    flip = (vstat == K.AT_LOWER) & (rng.random(n) < 0.03)
    d[flip] = -d[flip]
    delta = rng.normal(0, 1, m)
    xb = rng.uniform(0, 1, m)
    lob, hib = np.zeros(m), np.ones(m)
    phi = np.asfortranarray(rng.normal(0, 1, (8760, 38)))
    y = rng.normal(0, 1, 8760)
    col_sq = np.ascontiguousarray((phi * phi).sum(axis=0))
    x = rng.normal(0, 1, 100_000)
    x38 = rng.normal(0, 1, 38)

    def cd(mod):
        th = np.zeros(38)
        mod.lasso_cd(phi, y, 0.01, th, col_sq, 20, 0.0)

    return {
        "soft_threshold (38, FISTA)": lambda mod: mod.soft_threshold(x38, 0.3),
        "soft_threshold (1e5)": lambda mod: mod.soft_threshold(x, 0.3),
        "ftran 60 etas (m=6000)": lambda mod: mod.ftran_etas(v.copy(), *etas),
        "btran 60 etas (m=6000)": lambda mod: mod.btran_etas(v.copy(), *etas),
        "pricing (n=10000)": lambda mod: mod.price(d, vstat, 1e-9, False),
        "harris ratio test (m=6000)": lambda mod: mod.ratio_test(delta, xb, lob, hib, False, 1e-9, 1e-9, 1e-9),
        "lasso CD 20 sweeps (8760x38)": cd,
    }


def bench(fn, mod, repeat):
    t = timeit.Timer(lambda: fn(mod))
    n, _ = t.autorange()
    return min(t.repeat(repeat, n)) / n


SOLVE = """
import json, time
from recsizer import _kernels as K
from recsizer import io as rio
from recsizer.sizing import assemble, solve_bnb
cfg = rio.load_config({cfg!r}, load_series=False)
loads, w, hod = rio.repdays_from_dict(rio.load_json({rd!r}))
p = assemble(cfg, loads, w, hod)
t = time.perf_counter()
s = solve_bnb(p, gap_tol={gap})
print(json.dumps({{"backend": K.BACKEND, "seconds": time.perf_counter() - t, "objective": s.objective}}))
"""


def solve_times(repdays, config, gap, repeat):
    """Best of ``repeat`` fresh-process solves per backend, alternating backends."""
    out = {}
    code = SOLVE.format(cfg=str(config), rd=str(repdays), gap=gap)
    for _ in range(repeat):
        for pure in ("0", "1"):
            env = dict(os.environ, REC_SIZER_PURE=pure)
            res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            r = json.loads(res.stdout.strip().splitlines()[-1])
            if r["backend"] not in out or r["seconds"] < out[r["backend"]]["seconds"]:
                out[r["backend"]] = r
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solve", action="store_true", help="also time a sizing solve per backend")
    ap.add_argument("--repdays", default=str(ROOT / "fixtures" / "tiny" / "repdays.json"))
    ap.add_argument("--config", default=str(ROOT / "fixtures" / "tiny" / "rec.toml"))
    ap.add_argument("--gap", type=float, default=0.0)
    ap.add_argument("--solve-repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if K.compiled is None:
        print("compiled kernels are not available; build with `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<30}{'cython (us)':>14}{'python (us)':>14}{'speed-up':>10}")
    for name, fn in cases(rng).items():
        tc = bench(fn, K.compiled, args.repeat)
        tp = bench(fn, K.py, args.repeat)
        print(f"{name:<30}{tc * 1e6:>14.1f}{tp * 1e6:>14.1f}{tp / tc:>9.1f}x")
    if args.solve:
        res = solve_times(args.repdays, args.config, args.gap, args.solve_repeat)
        print()
        for b in ("cython", "python"):
            r = res[b]
            print(f"solve_bnb with {b:<7}: {r['seconds']:8.2f} s  objective {r['objective']:.6f}")
        print(f"speed-up: {res['python']['seconds'] / res['cython']['seconds']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
