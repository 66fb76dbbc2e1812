"""Fitted single-excitation decay rate against the Lindblad rate as the band grows.

Two sweeps: fixed mode spacing (band width grows with N) and fixed band
width (spacing shrinks with N).

    python3 scripts/oracle_convergence.py netlists/single_qubit.dq
"""

import argparse

from dissipq import oracle
from dissipq.netlist import parse_netlist


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("netlist")
    ap.add_argument("--modes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--resolution", type=float, default=oracle.DEFAULT_RESOLUTION)
    args = ap.parse_args()

    with open(args.netlist, encoding="utf-8") as fh:
        spec = parse_netlist(fh.read())

    print("fixed spacing: d_omega = resolution * Gamma")
    print(f"{'N':>6} {'Gamma_L':>12} {'Gamma_fit':>12} {'rel err':>10} {'residual':>10}")
    for N in args.modes:
        r = oracle.oracle_compare(spec, N, resolution=args.resolution)
        print(f"{N:6d} {r.gamma_lindblad:12.5e} {r.gamma_fitted:12.5e} {r.relative_error:10.3e} {r.fit_residual:10.2e}")

    print("\nfixed band width: N * d_omega held at the first entry")
    width = args.modes[0] * args.resolution
    for N in args.modes:
        r = oracle.oracle_compare(spec, N, resolution=width / N)
        print(f"{N:6d} {r.gamma_lindblad:12.5e} {r.gamma_fitted:12.5e} {r.relative_error:10.3e} {r.fit_residual:10.2e}")


if __name__ == "__main__":
    main()
