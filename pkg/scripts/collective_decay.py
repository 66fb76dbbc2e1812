"""Bright and dark states of two qubits on a common line.

Lindblad evolution and the exact single-excitation sector side by side.

    python3 scripts/collective_decay.py netlists/common.dq
"""

import argparse

import numpy as np

from dissipq import lindblad, oracle
from dissipq.hamiltonian import weak_coupling_model
from dissipq.netlist import parse_netlist


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("netlist")
    ap.add_argument("--modes", type=int, default=1000)
    ap.add_argument("--samples", type=int, default=11)
    args = ap.parse_args()

    with open(args.netlist, encoding="utf-8") as fh:
        spec = parse_netlist(fh.read())
    model = weak_coupling_model(spec)
    gen = lindblad.build_generator(model)
    gamma = oracle.lindblad_rate(model)
    t = np.linspace(0, 2 / gamma, args.samples)

    sector = oracle.sector_hamiltonian(
        weak_coupling_model(spec, baths=oracle.resonant_band(spec, args.modes, rate=gamma)))

    print(f"single-qubit rate Gamma = {gamma:.5e} 1/s")
    print(f"{'Gamma t':>8} {'bright L':>10} {'bright WW':>10} {'dark L':>10} {'dark WW':>10}")
    cols = []
    for name, sign in (("bell-plus", 1), ("bell-minus", -1)):
        v = (lindblad.ket("eg") + sign * lindblad.ket("ge")) / np.sqrt(2)
        traj = lindblad.evolve(gen, lindblad.initial_state(name, 2), t)
        cols.append(np.real(np.einsum("i,tij,j->t", v.conj(), traj.states, v)))
        cols.append(oracle.evolve_sector(sector, t, name).survival)
    for k, tk in enumerate(t):
        print(f"{gamma * tk:8.2f} " + " ".join(f"{c[k]:10.6f}" for c in cols))


if __name__ == "__main__":
    main()
