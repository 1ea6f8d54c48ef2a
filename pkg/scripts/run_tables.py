"""Write the spectral-efficiency and complexity table replicas to results/tables."""
import argparse
from pathlib import Path

from oqamwifi import cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results/tables"))
    ap.add_argument("--payload-bytes", type=int, default=4095)
    args = ap.parse_args()
    raise SystemExit(cli.main(["tables", "--out", str(args.out), "--payload-bytes", str(args.payload_bytes)]))
