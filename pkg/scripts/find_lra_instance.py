"""Search for a 2x2 QPSK instance where plain SIC misses ML but LLL-aided SIC hits it.

Prints the channel, transmitted symbols and noise so the case can be pinned in tests.
"""

import argparse

import numpy as np

from lrmimo.detectors import detect_lra_sic, detect_ml_exhaustive, detect_sic
from lrmimo.mimo import Constellation, add_awgn, random_symbols, sample_channel, trial_streams


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--tries", type=int, default=10_000)
    args = ap.parse_args()
    c = Constellation(4)
    for t in range(args.tries):
        g_ch, g_x, g_n = trial_streams(args.seed, t, 3)
        ch = np.asarray(sample_channel(2, 2, g_ch))
        x = random_symbols(2, c, g_x)
        y = add_awgn(ch @ x, args.sigma, g_n)
        ml = detect_ml_exhaustive(y, ch, c)
        sic = detect_sic(y, ch, c)
        lra = detect_lra_sic(y, ch, c)
        if not np.array_equal(sic.symbols, ml.symbols) and np.array_equal(lra.symbols, ml.symbols):
            np.set_printoptions(precision=17, floatmode="unique")
            print(f"trial {t}")
            print("channel =", repr(ch))
            print("x =", repr(x))
            print("y =", repr(y))
            print("ml =", repr(ml.symbols), "sic =", repr(sic.symbols))
            return
    print("no instance found")


if __name__ == "__main__":
    main()
