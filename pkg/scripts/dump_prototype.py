"""Dump the prototype filter and its intrinsic-interference weight tables."""
import argparse
from pathlib import Path

import numpy as np

from oqamwifi import oqam

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=64)
    ap.add_argument("--overlap", type=int, default=4)
    ap.add_argument("--out", type=Path, default=Path("results/prototype"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    proto = oqam.design_prototype(args.K, args.overlap)
    print("wrote", oqam.dump_coefficients(proto, args.out / f"phydyas_K{args.K}_g{args.overlap}.txt"))
    weights = oqam.intrinsic_weights(proto)
    for (pk, pn), table in sorted(weights.tables.items()):
        path = args.out / f"weights_k{pk}_n{pn}.csv"
        np.savetxt(path, np.column_stack([table.real.ravel(), table.imag.ravel()]),
                   delimiter=",", header="re,im  (rows: dk major, dn minor)", fmt="%.6e")
        print("wrote", path)
    print("w(0,+1) =", np.round(weights.w(0, 1, 0, 0), 4), " w(1,0) =", np.round(weights.w(1, 0, 0, 0), 4))
