"""Print the derived design parameters for a tour of (n, k, xi) cells."""

from bitmix import derive_params, total_test_bound
from bitmix.params import REGIME_GENERAL, REGIME_SMALLK


CELLS = [
    (2**14, 10, 0.0, REGIME_GENERAL),
    (2**16, 5, 0.0, REGIME_GENERAL),
    (2**16, 5, 0.05, REGIME_GENERAL),
    (2**20, 5, 0.0, REGIME_GENERAL),
    (2**20, 10, 0.0, REGIME_GENERAL),
    (2**20, 20, 0.0, REGIME_GENERAL),
    (2**26, 10, 0.0, REGIME_GENERAL),
    (2**16, 2, 0.0, REGIME_SMALLK),
    (2**20, 8, 0.0, REGIME_SMALLK),
]


def main():
    header = (
        f"{'n':>10} {'k':>3} {'xi':>5} {'regime':>8} "
        f"{'w':>4} {'ell':>3} {'c1':>3} {'|S|':>5} {'t1':>7} {'t2':>8} "
        f"{'t_total':>8} {'ratio':>6}"
    )
    print(header)
    print("-" * len(header))
    for n, k, xi, regime in CELLS:
        p = derive_params(n, k, xi=xi, regime=regime)
        if p.regime == "general":
            ratio = f"{p.t_total / total_test_bound(p):.3f}"
        else:
            ratio = "-"
        print(
            f"{p.n:>10} {p.k:>3} {p.xi:>5.2f} {p.regime:>8} "
            f"{p.w:>4} {p.ell:>3} {p.c1:>3} {p.s_size:>5} {p.t1:>7} {p.t2:>8} "
            f"{p.t_total:>8} {ratio:>6}"
        )
    print()
    print("t1 = c1*k*w tests identify which masking strings carry defectives;")
    print("t2 = ell*t1 tests carry the per-string code symbols, bit by bit.")
    print("ratio compares t_total against the 12k*max{...} scaling target")
    print("(general regime only); anything <= 2 is within the documented slack.")


if __name__ == "__main__":
    main()
