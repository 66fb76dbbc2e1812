"""``dissipq`` command line: validate, derive, foster, spectra, evolve, steady,
oracle-compare.

Exit codes: 0 success, 1 netlist validation or model error, 2 usage error.
CSV output uses ``,`` separators, a header row and LF line endings; JSON has
sorted keys.  ``DISSIPQ_THREADS`` caps BLAS threads.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import foster, hamiltonian, lindblad, netlist, oracle, spectra
from .errors import DissipqError, NetlistError

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    netlist: str | None
    output: str | None
    fmt: str | None

    @classmethod
    def from_args(cls, args):
        if args.netlist_opt and args.netlist_pos and args.netlist_opt != args.netlist_pos:
            raise UsageError("give the netlist either positionally or with --netlist, not both")
        return cls(args.subcommand, args.netlist_opt or args.netlist_pos, args.output,
                   getattr(args, "fmt", None))


def _num(x) -> str:
    return format(float(x), ".17g")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_num(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return parse


def _nonneg(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dissipq", description="Dissipation in superconducting qubit circuits.")
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)

    def add(name, help_, example):
        sp = sub.add_parser(name, help=help_, description=help_,
                            epilog=f"example: dissipq {name} {example}")
        sp.add_argument("netlist_pos", nargs="?", metavar="NETLIST", help="netlist file (.dq)")
        sp.add_argument("--netlist", dest="netlist_opt", metavar="PATH", help="netlist file (alternative)")
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")
        return sp

    sp = add("validate", "Parse, classify and check a netlist (JSON report).", "netlists/single_qubit.dq")

    sp = add("derive", "System-bath model: weights, J(w) parameters, rates (JSON).",
             "netlists/common.dq --strong")
    sp.add_argument("--strong", action="store_true", help="also report the strong-coupling normal modes")
    sp.add_argument("--modes", type=_positive(int), help="Foster modes per bath")
    sp.add_argument("--d-omega", type=_positive(float), help="Foster mode spacing, rad/s")

    sp = add("foster", "Foster LC chain of a resistor (CSV j,omega_j,C_j,L_j).",
             "netlists/single_qubit.dq --modes 200")
    sp.add_argument("--modes", type=_positive(int), help="number of modes (default 2000)")
    sp.add_argument("--d-omega", type=_positive(float), help="mode spacing, rad/s")
    sp.add_argument("--resistor", help="resistor name (default: first)")

    sp = add("spectra", "Voltage noise and bath spectral density on a frequency sweep (CSV).",
             "netlists/filtered.dq --wmin 1e9 --wmax 1e11 --points 200")
    sp.add_argument("--wmin", type=_nonneg, required=True, help="lowest angular frequency, rad/s")
    sp.add_argument("--wmax", type=_positive(float), required=True, help="highest angular frequency, rad/s")
    sp.add_argument("--points", type=_positive(int), default=200)
    sp.add_argument("--qubit", help="qubit for J (default: first)")
    sp.add_argument("--resistor", help="bath (default: first)")

    sp = add("evolve", "Lindblad evolution: populations and invariants (CSV).",
             "netlists/common.dq --init bell-plus --tmax 5e-6 --samples 100")
    sp.add_argument("--init", default="excited",
                    help="ground | excited | bell-plus | bell-minus | path to a JSON density matrix")
    sp.add_argument("--tmax", type=_positive(float), help="final time, s (default 5 / largest decay rate)")
    sp.add_argument("--samples", type=_positive(int), default=100)
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")

    add("steady", "Stationary state of the master equation (JSON).", "netlists/single_qubit.dq")

    sp = add("oracle-compare", "Fitted exact single-excitation decay vs Lindblad rate (JSON).",
             "netlists/single_qubit.dq --modes 2000")
    sp.add_argument("--modes", type=_positive(int), default=2000)
    sp.add_argument("--resolution", type=_positive(float), default=oracle.DEFAULT_RESOLUTION,
                    help="mode spacing in units of the Lindblad decay rate")
    sp.add_argument("--init", default="excited", help="excited | symmetric | antisymmetric")
    return p


def _load(cfg: RunConfig):
    path = cfg.netlist
    if path is None:
        raise UsageError("a netlist file is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read netlist: {exc}")
    return netlist.parse_netlist(text)


def _baths(spec, args):
    if getattr(args, "modes", None) is None and getattr(args, "d_omega", None) is None:
        return None
    wmax = max(q.omega for q in spec.qubits)
    N = args.modes or foster.DEFAULT_MODES
    dw = args.d_omega or foster.default_grid(wmax, N)[0]
    return {r.name: foster.ohmic_bath(r.R, r.omega_c, dw, N) for r in spec.resistors}


def _cmd_validate(spec, args):
    report = netlist.validate(spec)
    d = report.to_dict()
    d["canonical"] = netlist.serialize(spec)
    return _json(d), (EXIT_INVALID if report.level == "ERROR" else EXIT_OK)


def _cmd_derive(spec, args):
    model = hamiltonian.weak_coupling_model(spec, baths=_baths(spec, args))
    out = {
        "topology": model.topology.value,
        "qubits": {q: {"omega": model.omega[j], "inv_cap": model.inv_cap[j], "lambda": model.lam[j]}
                   for j, q in enumerate(model.qubits)},
        "direct_coupling": model.direct_coupling,
        "channels": [],
        "validation": netlist.validate(spec).to_dict(),
    }
    try:
        gen = lindblad.build_generator(model)
        rates = gen.rates
    except DissipqError as exc:
        rates, out["rates_error"] = {}, str(exc)
    for (q, b), dens in sorted(model.densities.items()):
        j = model.qubits.index(q)
        ch = {"qubit": q, "bath": b, "weight": model.weights[(q, b)], "gamma": dens.gamma,
              "omega_c": dens.omega_c, "J_at_qubit": dens(model.omega[j]),
              "T": model.thermal[b].T, "filtered": dens.filter is not None}
        if (q, b) in rates:
            ch["gamma_down"], ch["gamma_up"] = rates[(q, b)]
        out["channels"].append(ch)
    if args.strong:
        if len(spec.resistors) != 1:
            raise UsageError("--strong needs exactly one resistor")
        bath = next(iter(model.baths.values()))
        nm = hamiltonian.strong_coupling_normal_modes(spec, bath)
        out["strong"] = {
            "xi": nm.xi, "M0": nm.M0,
            "renormalized_omega_ratio": nm.renormalized_omega_ratio,
            "coupling_vector": nm.coupling_vector,
            "n_modes": int(nm.omega.size),
            "omega_min": float(nm.omega.min()), "omega_max": float(nm.omega.max()),
            "degenerate_groups": len(nm.degenerate),
        }
    return _json(out), EXIT_OK


def _cmd_foster(spec, args):
    if not spec.resistors:
        raise UsageError("netlist declares no resistor")
    name = args.resistor or spec.resistors[0].name
    r = spec.element(name)
    if not isinstance(r, netlist.ResistorDecl):
        raise UsageError(f"{name} is not a resistor")
    wmax = max((q.omega for q in spec.qubits), default=r.omega_c)
    N = args.modes or foster.DEFAULT_MODES
    dw = args.d_omega or foster.default_grid(wmax, N)[0]
    return foster.ohmic_bath(r.R, r.omega_c, dw, N).to_csv(), EXIT_OK


def _cmd_spectra(spec, args):
    if args.wmax <= args.wmin:
        raise UsageError("--wmax must exceed --wmin")
    model = hamiltonian.weak_coupling_model(spec)
    q = args.qubit or model.qubits[0]
    b = args.resistor or model.bath_names[0]
    if (q, b) not in model.densities:
        raise UsageError(f"no coupling between {q} and {b}")
    r = spec.element(b)
    dens = model.densities[(q, b)]
    thermal = model.thermal[b]
    w = np.linspace(args.wmin, args.wmax, args.points) if args.points > 1 else np.array([args.wmin])
    re_z = foster.ohmic_re(r.R, r.omega_c)
    s_vv = spectra.voltage_psd(re_z, w, thermal)
    pos = w > 0
    s_sym = np.full(w.shape, 4.0 * spectra.K_B * thermal.T * r.R)  # w -> 0 limit
    s_sym[pos] = spectra.symmetrized_single_sided_psd(re_z, w[pos], thermal)
    j_bare = dens.unfiltered()(w)
    j_filt = dens(w)
    rows = zip(w, s_vv, s_sym, j_bare, j_filt)
    return _csv(["omega", "S_VV", "S_sym", "J", "J_filtered"], rows), EXIT_OK


def _initial(name, n):
    if name in ("ground", "excited", "bell-plus", "bell-minus"):
        return lindblad.initial_state(name, n)
    try:
        with open(name, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read initial state {name!r}: {exc}")
    re = np.asarray(data["re"] if isinstance(data, dict) else data, dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)) if isinstance(data, dict) else np.zeros_like(re))
    rho = re + 1j * im
    if rho.shape != (2**n, 2**n):
        raise UsageError(f"initial state must be {2**n}x{2**n}")
    return rho


def _cmd_evolve(spec, args):
    model = hamiltonian.weak_coupling_model(spec)
    gen = lindblad.build_generator(model)
    n = len(model.qubits)
    rho0 = _initial(args.init, n)
    if args.tmax is None:
        top = max((v[0] + v[1] for v in gen.rates.values()), default=0.0)
        if top <= 0:
            raise UsageError("no dissipation; give --tmax")
        tmax = 5.0 / top
    else:
        tmax = args.tmax
    t = np.linspace(0.0, tmax, args.samples + 1)
    try:
        traj = lindblad.evolve(gen, rho0, t)
    except ValueError as exc:
        raise UsageError(str(exc))
    labels = lindblad.populations_labels(n)
    if args.fmt == "json":
        out = {"t": t, "trace_dev": traj.trace_dev, "min_eig": traj.min_eig, "step": traj.step}
        out.update({lab: traj.populations[:, k] for k, lab in enumerate(labels)})
        return _json(out), EXIT_OK
    rows = [(ti, *traj.populations[i], traj.trace_dev[i], traj.min_eig[i]) for i, ti in enumerate(t)]
    return _csv(["t", *labels, "trace_dev", "min_eig"], rows), EXIT_OK


def _cmd_steady(spec, args):
    model = hamiltonian.weak_coupling_model(spec)
    gen = lindblad.build_generator(model)
    ss = lindblad.steady_state(gen)
    out = {"kernel_dim": ss.kernel_dim, "degenerate": ss.degenerate, "residual": ss.residual,
           "labels": lindblad.populations_labels(len(model.qubits))}
    if ss.rho is not None:
        out["rho"] = {"re": ss.rho.real, "im": ss.rho.imag}
        out["populations"] = np.real(np.diag(ss.rho))
    else:
        out["basis"] = [{"re": b.real, "im": b.imag} for b in ss.basis]
    return _json(out), EXIT_OK


def _cmd_oracle(spec, args):
    factor = 2.0 if args.init == "symmetric" else 1.0
    if args.init == "antisymmetric":
        raise UsageError("antisymmetric state does not decay; no rate to compare")
    res = oracle.oracle_compare(spec, args.modes, resolution=args.resolution,
                                init=args.init, expected_factor=factor)
    return _json(res.to_dict()), EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "derive": _cmd_derive,
    "foster": _cmd_foster,
    "spectra": _cmd_spectra,
    "evolve": _cmd_evolve,
    "steady": _cmd_steady,
    "oracle-compare": _cmd_oracle,
}


def _thread_limit():
    n = os.environ.get("DISSIPQ_THREADS")
    if not n:
        return contextlib.nullcontext()
    try:
        k = int(n)
    except ValueError:
        raise UsageError(f"DISSIPQ_THREADS must be an integer, got {n!r}")
    if k < 1:
        raise UsageError("DISSIPQ_THREADS must be >= 1")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=k)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("missing subcommand; see dissipq --help")
        cfg = RunConfig.from_args(args)
        with _thread_limit():
            spec = _load(cfg)
            text, code = _COMMANDS[args.subcommand](spec, args)
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except NetlistError as exc:
        print(f"netlist error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INVALID
    except DissipqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INVALID
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main():
    sys.exit(run())
