"""Compare the compiled and NumPy assembly kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from avgschwarz import kernels
from avgschwarz.mesh import build_mesh


def bench(backend, mesh, coef, f_mid, repeat):
    stiff = min(timeit.repeat(lambda: backend.p1_stiffness_triplets(mesh.nodes, mesh.triangles, coef),
                              number=1, repeat=repeat))
    load = min(timeit.repeat(lambda: backend.p1_load(mesh.nodes, mesh.triangles, f_mid, mesh.num_nodes),
                             number=1, repeat=repeat))
    return stiff, load


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = {"numpy": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled extension not built; timing the NumPy backend only")
    rng = np.random.default_rng(0)
    print(f"{'n':>5s} {'triangles':>10s} {'backend':>8s} {'stiffness ms':>13s} {'load ms':>9s}")
    for n in args.sizes:
        mesh = build_mesh(n)
        coef = rng.uniform(1, 1e4, mesh.num_triangles)
        f_mid = rng.standard_normal((mesh.num_triangles, 3))
        for name, be in backends.items():
            s, l = bench(be, mesh, coef, f_mid, args.repeat)
            print(f"{n:5d} {mesh.num_triangles:10d} {name:>8s} {1e3 * s:13.2f} {1e3 * l:9.2f}")


if __name__ == "__main__":
    main()
