"""Coarse CFO estimation RMSE versus SNR for both preambles."""
import argparse
from pathlib import Path

from oqamwifi import harness

HERE = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", type=Path, default=HERE / "scenarios" / "cfo_rmse.cfg")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    sc = harness.load_scenario(args.config)
    records = harness.run_sweep(sc, workers=args.workers)
    harness.emit_report(records, sc.out_dir, sc, stem="cfo_rmse")
    rmse = {(r.scheme, r.snr_db): r.cfo_rmse for r in records}
    print(f"{'SNR':>6s} {'CP':>10s} {'OQAM':>10s}")
    for snr in sc.snr_db:
        print(f"{snr:6.1f} {rmse.get(('cp', snr), float('nan')):10.5f} "
              f"{rmse.get(('oqam', snr), float('nan')):10.5f}")
