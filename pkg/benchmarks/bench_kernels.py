"""Compare the numba and pure-numpy kernels on growing Fock spaces.

    python benchmarks/bench_kernels.py [--sites 3 4 5] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fockent import _kernels
from fockent.fock import FockSpace, QuantumState, two_site_modes


def cases(n_sites, rng):
    sites = [chr(ord("A") + k) for k in range(n_sites)]
    space = FockSpace(two_site_modes(sites), "fermion")
    pats = np.ascontiguousarray(space.patterns)
    lead = np.zeros(len(space.modes), dtype=np.bool_)
    lead[: len(space.modes) // 2] = True
    vec = QuantumState(space, rng.normal(size=space.dim) + 0j).normalize().vector
    j = len(space.modes) - 1
    counts = np.ascontiguousarray(pats[:, j])
    parity = space._parity(j)
    rho = np.outer(vec, vec.conj())
    env = np.ascontiguousarray(pats[:, :2] @ np.array([1, 2]))
    keep = np.ascontiguousarray(pats[:, 2:] @ (2 ** np.arange(len(space.modes) - 2)))
    signs = _kernels.reorder_signs_numpy(pats, lead)
    n_keep = 2 ** (len(space.modes) - 2)
    return space.dim, {
        "reorder_signs": ((pats, lead), {}),
        "ladder": ((vec, counts, parity, int(space.strides[j]), 1, True), {}),
        "partial_trace": ((rho, env, keep, signs, n_keep), {}),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    _kernels.warmup()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'dim':>8}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}")
    for n in args.sites:
        dim, work = cases(n, rng)
        for name, (a, kw) in work.items():
            fn_np = getattr(_kernels, f"{name}_numpy")
            fn_nb = getattr(_kernels, f"{name}_numba")
            fn_nb(*a, **kw)  # compile for these dtypes
            t_np = min(timeit.repeat(lambda: fn_np(*a, **kw), number=1, repeat=args.repeat))
            t_nb = min(timeit.repeat(lambda: fn_nb(*a, **kw), number=1, repeat=args.repeat))
            print(f"{name:<15}{dim:>8}{1e3 * t_np:>14.3f}{1e3 * t_nb:>14.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
