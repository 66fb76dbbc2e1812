"""Re Z recomposed from a finite Foster chain against the Ohmic target.

    python3 scripts/foster_convergence.py --R 50 --cutoff-ghz 100
"""

import argparse
import math

import numpy as np

from dissipq import foster


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R", type=float, default=50.0, help="resistance, ohm")
    ap.add_argument("--cutoff-ghz", type=float, default=100.0)
    ap.add_argument("--points", type=int, default=9, help="frequencies in (0, 2 w_C)")
    args = ap.parse_args()

    wc = 2 * math.pi * args.cutoff_ghz * 1e9
    target = foster.ohmic_re(args.R, wc)
    w = np.linspace(0.1, 2.0, args.points) * wc
    print(f"{'d_omega/w_C':>12} {'N':>8} {'eta/d_omega':>12} {'max rel err':>12}")
    for dw_frac in (1e-2, 1e-3, 1e-4):
        dw = dw_frac * wc
        N = int(round(20 / dw_frac))
        bath = foster.ohmic_bath(args.R, wc, dw, N)
        for eta_mult in (3.0, 10.0, 30.0):
            z = foster.recompose(bath, w, eta=eta_mult * dw)
            err = np.max(np.abs(z.real / target(w) - 1))
            print(f"{dw_frac:12.0e} {N:8d} {eta_mult:12.0f} {err:12.3e}")


if __name__ == "__main__":
    main()
