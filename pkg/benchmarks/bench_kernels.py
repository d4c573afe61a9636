"""Compare the compiled and pure-Python kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Times the Bessel pair and the Taubes source kernel on identical inputs,
reports the speed-up and the largest relative disagreement between the two
backends.
"""

import argparse
import timeit

import numpy as np

from vortexpairs import _pykernels

try:
    from vortexpairs import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.ascontiguousarray(np.exp(rng.uniform(np.log(1e-6), np.log(700.0), n)))
    coef = np.ascontiguousarray(rng.uniform(0.0, 1.0, n))
    ell = np.ascontiguousarray(rng.normal(0.0, 3.0, n))
    v = np.ascontiguousarray(rng.normal(0.0, 3.0, n))
    return x, coef, ell, v


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(n=1_000_000, repeat=5):
    x, coef, ell, v = _inputs(n)
    rows = []
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    for name, mod in backends:
        out = np.empty(n)
        dout = np.empty(n)
        t_bessel = _time(lambda: mod.k0k1_array(x), repeat)
        t_source = _time(lambda: mod.tanh_source(coef, ell, v, out, dout), repeat)
        results[name] = (np.asarray(mod.k0k1_array(x)[0]), out.copy())
        rows.append((name, t_bessel, t_source))
    print(f"n = {n}, best of {repeat}")
    print(f"{'backend':<8} {'bessel [s]':>12} {'source [s]':>12}")
    for name, tb, ts in rows:
        print(f"{name:<8} {tb:12.4f} {ts:12.4f}")
    if len(rows) == 2:
        (_, pb, ps), (_, cb, cs) = rows
        print(f"speed-up: bessel x{pb / cb:.1f}, source x{ps / cs:.1f}")
        k_py, s_py = results["python"]
        k_cy, s_cy = results["cython"]
        nz = k_py != 0
        print(f"max rel diff: bessel {np.max(np.abs(k_cy[nz] / k_py[nz] - 1)):.2e}, "
              f"source {np.max(np.abs(s_cy - s_py)):.2e} (abs)")
    else:
        print("compiled extension not available; only the Python backend was timed")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    bench(a.n, a.repeat)
