"""Command-line entry point: ``lrmimo {reduce,bound,proximity,ber}``.

Exit codes: 0 success, 1 usage/config error, 2 numerical guard refusal,
3 bound violation detected.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bounds import bound_table_csv
from .config import ConfigError, ExperimentConfig, read_config_file
from .detectors import DETECTORS, GuardError
from .experiments import ENSEMBLES, ber_csv, proximity_csv, run_ber, run_proximity
from .lattice import BasisFormatError, RankDeficientError, format_basis, read_basis
from .reduction import METHODS, RankGuardError, ReductionParams, reduce_basis

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VIOLATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _print_config(cfg: dict):
    for k, v in cfg.items():
        print(f"# {k}={v}", file=sys.stderr)


def cmd_reduce(args) -> int:
    basis = read_basis(args.input)
    params = ReductionParams(args.delta, args.beta if args.beta is not None else 2, args.max_tours)
    _print_config({"method": args.method, "delta": params.delta, "beta": params.beta, "max_tours": params.max_tours})
    red, stats = reduce_basis(basis, args.method, params)
    comment = f"method={args.method} delta={params.delta} beta={params.beta} max_tours={params.max_tours}"
    _emit(format_basis(red, comment), args.output)
    b1 = float(red.vectors[0] @ red.vectors[0])
    print(f"norm_b1_sq={b1!r} gram_det={red.gram_det()!r} tours={stats.tours}", file=sys.stderr)
    return EXIT_OK


def cmd_bound(args) -> int:
    ms = ExperimentConfig.build(flags={"m": args.m}).m
    betas = ExperimentConfig.build(flags={"beta": args.beta}).beta if args.beta else None
    pairs = []
    for m in ms:
        if m == 1:
            pairs.append((1, betas[0] if betas else 2))
            continue
        for b in betas or range(2, m + 1):
            if b > m:
                if args.beta and len(ms) == 1:
                    raise ConfigError("beta", f"block size {b} exceeds m={m}")
                continue
            pairs.append((m, b))
    _emit(bound_table_csv(pairs), args.output)
    return EXIT_OK


def _experiment_config(args, names) -> ExperimentConfig:
    file_values = read_config_file(args.config) if args.config else {}
    flags = {n: getattr(args, n) for n in names}
    return ExperimentConfig.build(file_values, flags)


_PROX_KEYS = ("m", "beta", "ensemble", "trials", "master_seed", "delta", "max_tours", "workers", "output", "archive_dir")
_BER_KEYS = ("n_tx", "n_rx", "order", "detectors", "snr_db", "trials", "master_seed", "delta", "beta", "max_tours", "workers", "output")


def cmd_proximity(args) -> int:
    cfg = _experiment_config(args, _PROX_KEYS).validate_proximity()
    header = cfg.summary("proximity")
    _print_config(header)
    reports = []
    for ens in cfg.ensemble:
        for m, b in cfg.proximity_pairs():
            reports.append(
                run_proximity(m, b, cfg.trials, ens, cfg.master_seed, cfg.delta, cfg.max_tours, cfg.workers, cfg.archive_dir)
            )
    _emit(proximity_csv(reports, header), cfg.output)
    bad = [r for r in reports if not r.ok]
    for r in bad:
        print(f"bound violated: m={r.m} beta={r.beta} ensemble={r.ensemble} cases={len(r.violations)}", file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_ber(args) -> int:
    cfg = _experiment_config(args, _BER_KEYS)
    ber_cfg = cfg.ber_config()
    header = ber_cfg.header()
    _print_config(header)
    _emit(ber_csv(run_ber(ber_cfg), header), cfg.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrmimo", description="Lattice-reduction-aided MIMO detection toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reduce", help="reduce a basis file")
    r.add_argument("input")
    r.add_argument("--method", choices=METHODS, default="lll")
    r.add_argument("--delta", type=float, default=0.99)
    r.add_argument("--beta", type=int)
    r.add_argument("--max-tours", type=int, default=32)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bound", help="tabulate the SIC proximity bound")
    b.add_argument("--m", required=True, help="rank, list or range (e.g. 4 or 2:8)")
    b.add_argument("--beta", help="block size, list or range; default 2..m")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bound)

    x = sub.add_parser("proximity", help="empirical proximity factors vs. the bound")
    x.add_argument("--config")
    x.add_argument("--m")
    x.add_argument("--beta")
    x.add_argument("--ensemble", help=f"one or more of {','.join(ENSEMBLES)}")
    x.add_argument("--trials")
    x.add_argument("--master-seed", dest="master_seed")
    x.add_argument("--delta")
    x.add_argument("--max-tours", dest="max_tours")
    x.add_argument("--workers")
    x.add_argument("--archive-dir", dest="archive_dir")
    x.add_argument("-o", "--output")
    x.set_defaults(func=cmd_proximity)

    e = sub.add_parser("ber", help="Monte-Carlo error rates")
    e.add_argument("--config")
    e.add_argument("--n-tx", dest="n_tx")
    e.add_argument("--n-rx", dest="n_rx")
    e.add_argument("--order")
    e.add_argument("--detectors", help=f"comma list from {','.join(DETECTORS)}")
    e.add_argument("--snr-db", dest="snr_db", help="comma list; 'inf' means noiseless")
    e.add_argument("--trials")
    e.add_argument("--master-seed", dest="master_seed")
    e.add_argument("--delta")
    e.add_argument("--beta")
    e.add_argument("--max-tours", dest="max_tours")
    e.add_argument("--workers")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_ber)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RankGuardError, GuardError) as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, BasisFormatError, RankDeficientError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
