"""BER/FER versus SNR for a scenario file, then the SNR where each curve crosses a target BER."""
import argparse
import math
from pathlib import Path

from oqamwifi import harness

HERE = Path(__file__).resolve().parent.parent


def crossing(snr, ber, target):
    for i in range(1, len(snr)):
        if ber[i] <= target < ber[i - 1]:
            if ber[i] == 0:
                return snr[i]
            f = math.log10(ber[i - 1] / target) / math.log10(ber[i - 1] / ber[i])
            return snr[i - 1] + f * (snr[i] - snr[i - 1])
    return math.nan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", type=Path, default=HERE / "scenarios" / "ber_4qam.cfg")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--frames", type=int)
    ap.add_argument("--target", type=float, default=1e-3)
    args = ap.parse_args()

    sc = harness.load_scenario(args.config)
    if args.frames:
        sc = sc.with_(n_frames=args.frames)
    records = harness.run_sweep(sc, workers=args.workers)
    for path in harness.emit_report(records, sc.out_dir, sc, stem="ber_sweep"):
        print("wrote", path)

    curves = {}
    for r in records:
        curves.setdefault((r.scheme, r.M, r.R), []).append(r)
    for (scheme, M, R), recs in curves.items():
        snr = [r.snr_db for r in recs]
        x = crossing(snr, [r.ber for r in recs], args.target)
        print(f"{scheme:5s} M={M:<3d} R={R:4s} BER {args.target:g} at {x:.2f} dB")


if __name__ == "__main__":
    main()
