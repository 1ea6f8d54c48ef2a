"""Batch command line: table replicas and Monte-Carlo sweeps."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, harness
from .params import ConfigError

# Per-command defaults; a --config file and explicit flags override them.
DEFAULTS = {
    "ber-sweep": harness.Scenario(snr_db=tuple(range(0, 32, 2)), n_frames=200),
    "cfo-rmse": harness.Scenario(snr_db=(0, 5, 10, 15, 20), n_frames=500, measure="sync"),
    "efficiency-sweep": harness.Scenario(orders=(4, 16, 64), snr_db=tuple(range(0, 40, 5)),
                                         n_frames=100),
}


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="scenario file (key = value lines)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--genie-sync", action="store_true", help="perfect timing and CFO")
    p.add_argument("--genie-csi", action="store_true", help="perfect channel knowledge")
    p.add_argument("--frames", type=int, help="frames per SNR point")
    p.add_argument("--snr", help="SNR list 'a,b,c' or range 'lo:step:hi' (dB)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oqamwifi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("tables", help="spectral-efficiency and complexity table replicas")
    t.add_argument("--out", type=Path, help="output directory")
    t.add_argument("--payload-bytes", type=int, default=4095)
    for name, text in (("ber-sweep", "BER/FER versus SNR"),
                       ("cfo-rmse", "CFO estimation RMSE versus SNR"),
                       ("efficiency-sweep", "FER-dependent spectral efficiency versus SNR")):
        _add_sweep_flags(sub.add_parser(name, help=text))
    return parser


def scenario_from_args(args) -> harness.Scenario:
    sc = DEFAULTS[args.command]
    if args.config is not None:
        sc = harness.load_scenario(args.config, sc)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.genie_sync:
        changes["genie_sync"] = True
    if args.genie_csi:
        changes["genie_csi"] = True
    if args.frames is not None:
        changes["n_frames"] = args.frames
    if args.snr:
        changes["snr_db"] = harness._parse_snr(args.snr)
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    return sc.with_(**changes)


def _tables(args) -> int:
    rows2 = analysis.table2_rows(args.payload_bytes)
    rows3 = analysis.table3_rows(args.payload_bytes)
    h3 = ("M", "R", "c_sys_tx", "c_sys_rx", "c_sys")
    text = ("Spectral efficiency (R = 1/2)\n" + analysis.format_text(rows2, analysis.TABLE2_HEADER)
            + "\nRelative complexity, OQAM over CP\n" + analysis.format_text(rows3, h3))
    print(text, end="")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "table2.csv").write_text(analysis.format_csv(rows2, analysis.TABLE2_HEADER))
        (args.out / "table3.csv").write_text(analysis.format_csv(rows3, h3))
        (args.out / "tables.txt").write_text(text)
    return 0


def _sweep(args) -> int:
    sc = scenario_from_args(args)
    records = harness.run_sweep(sc, workers=args.workers)
    stem = args.command.replace("-", "_")
    for path in harness.emit_report(records, sc.out_dir, sc, stem=stem):
        print(path)
    print(harness.records_csv(records), end="")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "tables":
            return _tables(args)
        return _sweep(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
