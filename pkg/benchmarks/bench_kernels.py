"""Time the compiled and numpy stencil backends, and one end-to-end solve.

Usage: python3 benchmarks/bench_kernels.py [--sizes 16 32] [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from yamabe_lab import kernels


def bench_kernels(sizes, repeat):
    rows = []
    impls = kernels.backends()
    for n in sizes:
        rng = np.random.default_rng(n)
        phi = rng.normal(size=(n,) * 4)
        coef = np.exp(0.1 * rng.normal(size=(n,) * 4))
        h = 1.0 / n
        ref = None
        for name, mod in impls.items():
            for kernel, args in (("laplacian", (phi, h)), ("div_grad", (phi, coef, h))):
                fn = getattr(mod, kernel)
                number = max(1, int(2e6 / n**4))
                best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number
                out = fn(*args)
                if ref is None or ref[0] != (n, kernel):
                    ref = ((n, kernel), out)
                diff = float(np.max(np.abs(out - ref[1])))
                rows.append((n, kernel, name, best * 1e3, diff))
    return rows


def solve_time(pure: bool) -> float:
    # fresh interpreter so the backend is chosen at import
    code = (
        "import time, numpy as np\n"
        "from yamabe_lab import confgrid, spectrum\n"
        "x = confgrid.coordinates(16)\n"
        "g = confgrid.ConformalGrid(16, 1 + 0.2*np.cos(2*np.pi*x[0]))\n"
        "op = spectrum.assemble(g, confgrid.WeightedField(0.0, -2), 'stencil')\n"
        "t = time.perf_counter(); spectrum.lowest_eigenpair(op, 1e-10); print(time.perf_counter() - t)\n"
    )
    env = dict(os.environ)
    env.pop("YAMABE_LAB_PURE", None)
    if pure:
        env["YAMABE_LAB_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 32])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--no-solve", action="store_true", help="skip the end-to-end eigensolve timing")
    args = p.parse_args(argv)

    print(f"default backend: {kernels.BACKEND}")
    print(f"{'N':>4} {'kernel':<10} {'backend':<8} {'ms/call':>10} {'max |diff|':>11}")
    for n, kernel, name, ms, diff in bench_kernels(args.sizes, args.repeat):
        print(f"{n:>4} {kernel:<10} {name:<8} {ms:>10.3f} {diff:>11.2e}")
    if not args.no_solve:
        print("\nlowest eigenpair, N=16 stencil scheme:")
        for pure in (False, True):
            print(f"  {'python' if pure else 'default':<8} {solve_time(pure):8.3f} s")


if __name__ == "__main__":
    main()
