"""Median decode time as n and k grow (the sublinear-decoding story)."""

import argparse

import numpy as np

from bitmix import build_design, decode, simulate_outcomes
from bitmix.seeding import derive_seed


def median_ms(n, k, trials):
    bundle = build_design(n, k, seed=derive_seed(5, n, k), verify=False)
    rng = np.random.default_rng(derive_seed(6, n, k))
    times = []
    for _ in range(trials):
        defectives = rng.choice(n, size=k, replace=False) + 1
        y1, y2 = simulate_outcomes(defectives, bundle.assignment,
                                   bundle.masking, bundle.codebook)
        times.append(decode(y1, y2, bundle.masking, bundle.codebook).total_seconds)
    return 1e3 * float(np.median(times)), bundle.params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=201)
    args = ap.parse_args()

    print("fixed k=10, growing n 4096-fold (decode reads t = O(k log k log n) bits):")
    print(f"{'n':>10} {'t_total':>8} {'median ms':>10}")
    base = None
    for n in (2**14, 2**20, 2**26):
        ms, p = median_ms(n, 10, args.trials)
        base = base or ms
        print(f"{n:>10} {p.t_total:>8} {ms:>10.3f}   ({ms / base:.2f}x)")

    print()
    print("fixed n=2^20, doubling k (work grows ~k^2 log k):")
    print(f"{'k':>10} {'t_total':>8} {'median ms':>10}")
    base = None
    for k in (5, 10, 20):
        ms, p = median_ms(2**20, k, args.trials)
        base = base or ms
        print(f"{k:>10} {p.t_total:>8} {ms:>10.3f}   ({ms / base:.2f}x)")

    print()
    print("the decoder never touches the n item columns: it scores |S| strings")
    print("against the batch-1 outcome and decodes one codeword per survivor.")


if __name__ == "__main__":
    main()
