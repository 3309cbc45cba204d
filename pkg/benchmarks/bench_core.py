"""Timing comparison of the compiled recursion kernels vs the numpy fallback.

Run from the repo root after an editable install:

    python3 benchmarks/bench_core.py [--repeat 5]

Each kernel is timed best-of-repeat on the sizes the estimators actually hit
(innovations order ~400 inside the MC study, Durbin-Levinson order ~1536 in
the spectral round trip). The fallback is imported directly so both backends
run in one process regardless of CMAKIT_PURE_PYTHON.
"""

import argparse
import time

import numpy as np

from cmakit._core import _fallback

try:
    from cmakit._core import _recursions
except ImportError:
    _recursions = None


def _car1_acvf(m, delta=0.0625, lam=-1.0):
    h = np.arange(m + 1, dtype=float)
    return np.exp(lam * h * delta) / (-2.0 * lam)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    gamma_inn = _car1_acvf(400)
    gamma_lev = _car1_acvf(2048)
    phi = 0.98 * np.exp(np.arange(1, 31) * -0.35)
    r_grid = np.linspace(0.5, 3.5, 200)

    cases = [
        ("innovations m=400", lambda mod: mod.innovations_recursion(gamma_inn, 400)),
        ("levinson m=2048", lambda mod: mod.levinson_recursion(gamma_lev, 2048)),
        ("ma_expansion p=30 n=4096", lambda mod: mod.ma_expansion(phi, 4096)),
        ("hurwitz s=5/3, 200 pts", lambda mod: mod.hurwitz_zeta_array(5.0 / 3.0, r_grid)),
    ]

    backends = [("fallback", _fallback)]
    if _recursions is not None:
        backends.insert(0, ("compiled", _recursions))
    else:
        print("compiled extension not built; timing fallback only")

    header = f"{'kernel':28s}" + "".join(f"{name:>12s}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, call in cases:
        row = f"{label:28s}"
        timings = []
        for _, mod in backends:
            t = best_of(lambda m=mod: call(m), args.repeat)
            timings.append(t)
            row += f"{t * 1e3:10.2f}ms"
        if len(timings) == 2:
            row += f"{timings[1] / timings[0]:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
