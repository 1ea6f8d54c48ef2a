"""FER-dependent spectral efficiency eta_hat = eta (1 - FER) versus SNR."""
import argparse
from pathlib import Path

from oqamwifi import harness

HERE = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", type=Path, default=HERE / "scenarios" / "efficiency.cfg")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    sc = harness.load_scenario(args.config)
    records = harness.run_sweep(sc, workers=args.workers)
    harness.emit_report(records, sc.out_dir, sc, stem="efficiency")
    for r in records:
        print(f"{r.scheme:5s} M={r.M:<3d} {r.snr_db:5.1f} dB  FER {r.fer:.3f}  eta_hat {r.eta_hat:.3f}")
