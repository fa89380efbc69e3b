"""Vector error / BER curves for the detector family on one antenna setup."""

import argparse
import time

from lrmimo.experiments import BerConfig, ber_csv, run_ber


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-tx", type=int, default=4)
    ap.add_argument("--n-rx", type=int, default=4)
    ap.add_argument("--order", type=int, default=4)
    ap.add_argument("--snr-db", default="0,5,10,15,20,25")
    ap.add_argument("--detectors", default="ml,mmse,sic,lra-lll-sic,lra-bkz-sic")
    ap.add_argument("--beta", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=20261019)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("-o", "--output", default="ber_curve.csv")
    args = ap.parse_args()

    cfg = BerConfig(
        master_seed=args.seed, n_tx=args.n_tx, n_rx=args.n_rx, order=args.order,
        detectors=tuple(args.detectors.split(",")), snr_db=tuple(float(s) for s in args.snr_db.split(",")),
        trials=args.trials, beta=args.beta, workers=args.workers,
    ).validate()
    t0 = time.perf_counter()
    curves = run_ber(cfg)
    for c in curves:
        rates = "  ".join(f"{s:g}dB:{c.vec_rate(k):.2e}" for k, s in enumerate(c.snr_db))
        print(f"{c.detector:12s} {rates}")
    with open(args.output, "w") as f:
        f.write(ber_csv(curves, cfg.header()))
    print(f"wrote {args.output} in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
