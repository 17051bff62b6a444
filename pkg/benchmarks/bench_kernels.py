"""Compare the compiled and pure oracle kernels on corpus workloads.

Runs trap enumeration, 1-invariant enumeration and reachability on
growing philosophers and herman rings, timing both backends where the
pure one finishes in reasonable time.  Result counts are asserted
equal whenever both backends run the same job.

Usage: python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent
                        / "src"))

from trapver._kernels import BACKEND, pure  # noqa: E402
from trapver.petri import instantiate  # noqa: E402
from trapver.syntax import load_system  # noqa: E402

try:
    from trapver._kernels import _native
except ImportError:
    _native = None

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def _net_args(net):
    return ([t.pre for t in net.transitions],
            [t.post for t in net.transitions])


def _time(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def _row(job, backend, seconds, items):
    rate = f"{items / seconds / 1e6:8.2f}M/s" if seconds else " " * 11
    print(f"{job:<34} {backend:<7} {seconds:8.3f}s {items:>10}  {rate}")


def bench_enumeration(quick):
    sys_ = load_system(str(CORPUS / "philosophers.cbs"))
    sizes = (4, 5) if quick else (4, 5, 6)
    for n in sizes:
        net = instantiate(sys_, n)
        pres, posts = _net_args(net)
        space = 1 << net.nplaces
        job = f"traps philosophers n={n} (2^{net.nplaces})"
        counts = {}
        if _native is not None:
            dt, out = _time(_native.enumerate_traps, net.nplaces, pres,
                            posts)
            counts["native"] = len(out)
            _row(job, "native", dt, space)
        if net.nplaces <= 16:
            dt, out = _time(pure.enumerate_traps, net.nplaces, pres, posts)
            counts["pure"] = len(out)
            _row(job, "pure", dt, space)
        if len(counts) == 2:
            assert counts["native"] == counts["pure"], counts

        job = f"1-invariants philosophers n={n}"
        counts = {}
        if _native is not None:
            dt, out = _time(_native.enumerate_one_invariants, net.nplaces,
                            pres, posts, net.m0)
            counts["native"] = len(out)
            _row(job, "native", dt, space)
        if net.nplaces <= 16:
            dt, out = _time(pure.enumerate_one_invariants, net.nplaces,
                            pres, posts, net.m0)
            counts["pure"] = len(out)
            _row(job, "pure", dt, space)
        if len(counts) == 2:
            assert counts["native"] == counts["pure"], counts


def bench_reachability(quick):
    sys_ = load_system(str(CORPUS / "herman.cbs"))
    sizes = (12, 14) if quick else (12, 16, 18)
    for n in sizes:
        net = instantiate(sys_, n)
        pres, posts = _net_args(net)
        cap = 10 ** 7
        job = f"bfs herman n={n}"
        counts = {}
        if _native is not None and net.nplaces <= 64:
            dt, (order, violated, truncated) = _time(
                _native.bfs_reach, net.nplaces, pres, posts, net.m0, cap)
            assert not violated and not truncated
            counts["native"] = len(order)
            _row(job, "native", dt, len(order))
        if n <= 14:
            dt, (order, violated, truncated) = _time(
                pure.bfs_reach, net.nplaces, pres, posts, net.m0, cap)
            assert not violated and not truncated
            counts["pure"] = len(order)
            _row(job, "pure", dt, len(order))
        if len(counts) == 2:
            assert counts["native"] == counts["pure"], counts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true",
                    help="smaller sizes, under ten seconds total")
    args = ap.parse_args()
    print(f"active backend: {BACKEND}")
    if _native is None:
        print("compiled kernels unavailable; pure timings only")
    print(f"{'job':<34} {'backend':<7} {'time':>9} {'items':>10}")
    bench_enumeration(args.quick)
    bench_reachability(args.quick)


if __name__ == "__main__":
    main()
