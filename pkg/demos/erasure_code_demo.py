"""The index code on its own: erasures, then errors-and-erasures.

Batch 2 stores, for every set bit of a masking string, the ell-bit symbols of
a Reed-Solomon codeword identifying the item.  Positions where two listed
strings overlap are unreliable (their symbols OR together), so the decoder
erases them by position — which is exactly the channel this code is built
for: any w - m erasures are recoverable because every m surviving symbols
pin the degree-(m-1) message polynomial.  Under test noise the decoder
switches to errors-and-erasures mode and pays two erasures per unknown error.
"""

import numpy as np

from bitmix.code import ERASURE, Codebook


def main():
    cb = Codebook(n=64, w=6, ell=3)
    print(f"codebook: n={cb.n} items, w={cb.w} symbols over GF(2^{cb.ell}), "
          f"message length m={cb.m} (distance w-m+1 = {cb.w - cb.m + 1})")

    item = 37
    word = cb.encode_index(item)
    print(f"item {item} -> codeword {word.tolist()}")

    received = word.copy()
    received[[0, 2, 5, 3]] = ERASURE  # w - m = 4 erasures: worst case
    print(f"received with 4 erasures: "
          f"{[int(v) if v != ERASURE else '?' for v in received]}")
    print(f"decoded -> {cb.decode_erasures(received)}")

    print()
    big = Codebook(n=2**16, w=259, ell=9)
    print(f"noisy-cell shape: w={big.w}, m={big.m}; radius 2e + f <= {big.w - big.m}")
    rng = np.random.default_rng(3)
    word = big.encode_index(51773).copy()
    err_pos = rng.choice(big.w, size=100, replace=False)
    for pos in err_pos[:80]:
        word[pos] ^= int(rng.integers(1, 2**big.ell))  # 80 symbol errors
    word[err_pos[80:]] = ERASURE  # plus 20 erasures
    print(f"80 errors + 20 erasures (2*80 + 20 = 180 <= {big.w - big.m})")
    print(f"decoded -> {big.decode_errors_and_erasures(word)}")

    word[rng.choice(big.w, size=60, replace=False)] = 0  # pile on more damage
    try:
        big.decode_errors_and_erasures(word)
        print("decoded despite the pile-on (landed within some radius)")
    except Exception as exc:
        print(f"beyond the radius the decoder refuses: {type(exc).__name__}: {exc}")


if __name__ == "__main__":
    main()
