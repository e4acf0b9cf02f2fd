"""Compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each row times one kernel on both backends and checks that the outputs
agree before reporting the speed-up.
"""

import argparse
import time

import numpy as np

from sparsecausal import _backend, _fallback
from sparsecausal.estimators import CovarianceModel, covariance, glasso_precision, logo_precision
from sparsecausal.simulator import build_lagged_panel, generate_process_spec, simulate
from sparsecausal.tmfg import gain_weights


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def corr(n, q, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((q, n)) @ rng.standard_normal((n, n)) * 0.2 + rng.standard_normal((q, n))
    return np.corrcoef(X.T)


def cases(quick):
    sizes = [60, 200] if quick else [80, 240, 600]
    for n in sizes:
        W = gain_weights(corr(n, 2 * n))
        start = tuple(_fallback.tmfg_seed(W))

        def seed(k, W=W):
            return k.tmfg_seed(W)

        def grow(k, W=W, start=start):
            return k.tmfg_grow(W, start)

        yield f"tmfg_seed N={n}", seed, lambda a, b: tuple(a) == tuple(b)
        yield f"tmfg_grow N={n}", grow, lambda a, b: all(np.array_equal(x, y) for x, y in zip(a, b))

    for p, tau, q in ([(20, 3, 1000)] if quick else [(20, 3, 1000), (100, 5, 20000)]):
        spec = generate_process_spec(p, tau, p, 1)
        noise = np.random.default_rng(2).standard_normal((q + 100 * (tau + 1), p))

        def recursion(k, spec=spec, noise=noise):
            out = noise.copy()
            k.var_recursion(spec.coeffs, out)
            return out

        yield f"var_recursion p={p} tau={tau} rows={noise.shape[0]}", recursion, \
            lambda a, b: np.allclose(a, b, rtol=1e-12, atol=1e-12)

    for p, tau, q in ([(10, 3, 200)] if quick else [(20, 3, 200), (40, 3, 200)]):
        spec = generate_process_spec(p, tau, p, 3)
        m = covariance(build_lagged_panel(simulate(spec, q + tau, rng_seed=4), tau))

        def glasso(k, m=m):
            return glasso_precision(m, 0.1, backend=k).J

        def logo(k, m=m):
            return logo_precision(m, 0.1, backend=k).J

        yield f"glasso N={m.n} q={q}", glasso, lambda a, b: np.allclose(a, b, atol=1e-9)
        yield f"logo N={m.n} q={q}", logo, np.array_equal


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args(argv)
    if not _backend.compiled:
        print("compiled kernels are not available; build the extension first")
        return 1
    fast = _backend.kernels
    print(f"{'kernel':44s}{'python s':>11s}{'compiled s':>12s}{'speed-up':>10s}  agree")
    for name, fn, same in cases(args.quick):
        t_py, out_py = best_of(lambda: fn(_fallback), args.repeat)
        t_c, out_c = best_of(lambda: fn(fast), args.repeat)
        print(f"{name:44s}{t_py:11.4f}{t_c:12.4f}{t_py / t_c:10.1f}x  {same(out_py, out_c)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
