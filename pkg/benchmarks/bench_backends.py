#!/usr/bin/env python3
"""Compare the accelerated and pure-numpy kernel backends.

Times the masked-softmax and layer-norm kernels (plus their backward passes)
at several sequence lengths and prints an aligned table of per-call medians.
Run after installing the package:

    python3 benchmarks/bench_backends.py [--sizes 64,128,256,512] [--repeats 7]
"""

import argparse

from tokensieve.cli import run_backend_bench


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,128,256,512", help="comma-separated sequence lengths")
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()
    sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
    print(run_backend_bench(sizes=sizes, heads=args.heads, repeats=args.repeats))


if __name__ == "__main__":
    main()
