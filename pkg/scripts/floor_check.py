"""Desk-scale BER-floor check: 64-QAM at high SNR and the 4-QAM gap at BER 1e-3."""
import argparse

from oqamwifi import harness

from ber_sweep import crossing

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    hi = harness.Scenario(orders=(64,), snr_db=(34,), n_frames=args.frames, master_seed=args.seed)
    for r in harness.run_sweep(hi, workers=args.workers):
        print(f"64-QAM @ 34 dB  {r.scheme:5s} BER {r.ber:.3e}  FER {r.fer:.3f}")
    snrs = tuple(range(10, 26, 2))
    lo = harness.Scenario(snr_db=snrs, n_frames=args.frames, master_seed=args.seed)
    recs = harness.run_sweep(lo, workers=args.workers)
    for scheme in ("cp", "oqam"):
        x = crossing(snrs, [r.ber for r in recs if r.scheme == scheme], 1e-3)
        print(f"4-QAM BER 1e-3  {scheme:5s} {x:.2f} dB")
