"""Line-oriented circuit DSL for qubits capacitively coupled to resistive baths.

Every statement has the form ``kind name [name2] key=value ...``; ``#`` starts a
comment.  Supported kinds::

    qubit    A  freq=5GHz C=80fF         # or omega=<rad/s>
    resistor R1 R=50ohm cutoff=100GHz T=50mK   # or cutoff_omega=<rad/s>
    filter   F1 C=1pF L=1nH load=R1      # LC tank loaded by resistor R1
    cap      A R1 Cg=1fF                 # coupling capacitor (C=, Cg= or Cc=)

``freq=`` and ``cutoff=`` are ordinary frequencies in Hz and are stored as
angular frequencies (multiplied by 2*pi).  Everything stored in a
:class:`CircuitSpec` is SI.  Bare numbers are read as SI values.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .errors import (
    DanglingReference,
    DuplicateName,
    NetlistSyntaxError,
    NonPositiveValue,
    UnsupportedUnit,
)

WEAK_COUPLING_WARN = 0.1

# suffix -> power of ten, per physical quantity
_UNITS = {
    "frequency": {"": 0, "GHz": 9, "MHz": 6},
    "angular": {"": 0},
    "capacitance": {"": 0, "fF": -15, "pF": -12},
    "inductance": {"": 0, "nH": -9, "pH": -12},
    "resistance": {"": 0, "ohm": 0, "kohm": 3},
    "temperature": {"": 0, "K": 0, "mK": -3},
}
_ALL_SUFFIXES = {s for table in _UNITS.values() for s in table if s}

_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(.*)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class TopologyClass(enum.Enum):
    SingleQubitBath = "SingleQubitBath"
    SingleQubitFilteredBath = "SingleQubitFilteredBath"
    TwoQubitCommonBath = "TwoQubitCommonBath"
    TwoQubitCommonBathDirect = "TwoQubitCommonBathDirect"
    TwoQubitSeparateBaths = "TwoQubitSeparateBaths"
    Unsupported = "Unsupported"


@dataclass(frozen=True)
class QubitDecl:
    name: str
    omega: float  # rad/s
    C: float  # F


@dataclass(frozen=True)
class ResistorDecl:
    name: str
    R: float  # ohm
    omega_c: float  # rad/s
    T: float  # K, 0 means vacuum bath


@dataclass(frozen=True)
class FilterDecl:
    name: str
    C_f: float
    L_f: float
    load: str | None = None  # resistor in series with the tank

    @property
    def omega_f(self) -> float:
        return 1.0 / math.sqrt(self.L_f * self.C_f)


@dataclass(frozen=True)
class CouplingDecl:
    a: str
    b: str
    C: float


@dataclass(frozen=True)
class CircuitSpec:
    qubits: tuple[QubitDecl, ...] = ()
    resistors: tuple[ResistorDecl, ...] = ()
    filters: tuple[FilterDecl, ...] = ()
    couplings: tuple[CouplingDecl, ...] = ()
    topology: TopologyClass = TopologyClass.Unsupported

    def element(self, name):
        for group in (self.qubits, self.resistors, self.filters):
            for el in group:
                if el.name == name:
                    return el
        raise KeyError(name)

    def coupling(self, a, b):
        """Capacitance between ``a`` and ``b`` (0.0 when not coupled)."""
        for c in self.couplings:
            if {c.a, c.b} == {a, b}:
                return c.C
        return 0.0


# ---------------------------------------------------------------------------
# values


def parse_value(token: str, quantity: str, line=None, column=None) -> float:
    """Convert ``5GHz``-style tokens to SI floats (angular for frequencies)."""
    m = _NUMBER.match(token)
    if not m:
        raise NetlistSyntaxError(f"malformed number {token!r}", line, column)
    number, suffix = m.group(1), m.group(2)
    table = _UNITS[quantity]
    if suffix not in table:
        if suffix in _ALL_SUFFIXES:
            raise UnsupportedUnit(f"unit {suffix!r} is not a {quantity} (line {line})")
        raise UnsupportedUnit(f"unknown unit {suffix!r} (line {line})")
    try:
        # exact decimal scaling, one rounding to binary
        value = float(Decimal(number).scaleb(table[suffix]))
    except InvalidOperation:  # pragma: no cover - regex already screens
        raise NetlistSyntaxError(f"malformed number {token!r}", line, column)
    if quantity == "frequency":
        value *= 2.0 * math.pi
    return value


def _fmt(x: float) -> str:
    return f"{x:.16e}"


# ---------------------------------------------------------------------------
# parsing

_KINDS = {
    # kind: (number of names, {key: (field, quantity)}, required fields)
    "qubit": (1, {"freq": ("omega", "frequency"), "omega": ("omega", "angular"),
                  "C": ("C", "capacitance")}, ("omega", "C")),
    "resistor": (1, {"R": ("R", "resistance"), "cutoff": ("omega_c", "frequency"),
                     "cutoff_omega": ("omega_c", "angular"), "T": ("T", "temperature")},
                 ("R", "omega_c", "T")),
    "filter": (1, {"C": ("C_f", "capacitance"), "L": ("L_f", "inductance"),
                   "load": ("load", None)}, ("C_f", "L_f")),
    "cap": (2, {"C": ("C", "capacitance"), "Cg": ("C", "capacitance"),
                "Cc": ("C", "capacitance")}, ("C",)),
}


def _tokens(line: str):
    """Yield (column, token) pairs, 1-based columns."""
    for m in re.finditer(r"\S+", line):
        yield m.start() + 1, m.group(0)


def parse_netlist(text: str) -> CircuitSpec:
    qubits, resistors, filters, couplings = [], [], [], []
    names: dict[str, int] = {}
    cap_refs = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = list(_tokens(body))
        if not toks:
            continue
        col, kind = toks[0]
        if kind not in _KINDS:
            raise NetlistSyntaxError(f"unknown element kind {kind!r}", lineno, col)
        n_names, keys, required = _KINDS[kind]
        if len(toks) < 1 + n_names:
            raise NetlistSyntaxError(f"{kind} needs {n_names} name(s)", lineno, col + len(kind))
        refs = []
        for c, tok in toks[1:1 + n_names]:
            if "=" in tok or not _NAME.match(tok):
                raise NetlistSyntaxError(f"invalid name {tok!r}", lineno, c)
            refs.append((c, tok))

        values = {}
        for c, tok in toks[1 + n_names:]:
            key, eq, val = tok.partition("=")
            if not eq or not key or not val:
                raise NetlistSyntaxError(f"expected key=value, got {tok!r}", lineno, c)
            if key not in keys:
                raise NetlistSyntaxError(f"unknown key {key!r} for {kind}", lineno, c)
            fname, quantity = keys[key]
            if fname in values:
                raise NetlistSyntaxError(f"{fname} given twice", lineno, c)
            if quantity is None:
                if not _NAME.match(val):
                    raise NetlistSyntaxError(f"invalid name {val!r}", lineno, c + len(key) + 1)
                values[fname] = val
                continue
            v = parse_value(val, quantity, lineno, c + len(key) + 1)
            if kind == "resistor" and fname == "T":
                if not v >= 0.0 or math.isinf(v):
                    raise NonPositiveValue(f"temperature must be >= 0 (line {lineno})")
            elif not v > 0.0 or math.isinf(v):
                raise NonPositiveValue(f"{key} must be > 0 (line {lineno})")
            values[fname] = v
        missing = [f for f in required if f not in values]
        if missing:
            raise NetlistSyntaxError(f"{kind} is missing {', '.join(missing)}", lineno, col)

        if kind == "cap":
            (_, a), (_, b) = refs
            if a == b:
                raise NetlistSyntaxError("capacitor connects an element to itself", lineno, refs[1][0])
            cap_refs.append((lineno, a, b))
            couplings.append(CouplingDecl(a, b, values["C"]))
            continue
        name = refs[0][1]
        if name in names:
            raise DuplicateName(f"{name!r} declared on lines {names[name]} and {lineno}")
        names[name] = lineno
        if kind == "qubit":
            qubits.append(QubitDecl(name, values["omega"], values["C"]))
        elif kind == "resistor":
            resistors.append(ResistorDecl(name, values["R"], values["omega_c"], values["T"]))
        else:
            filters.append(FilterDecl(name, values["C_f"], values["L_f"], values.get("load")))

    if not names:
        raise NetlistSyntaxError("no elements declared")
    for lineno, a, b in cap_refs:
        for ref in (a, b):
            if ref not in names:
                raise DanglingReference(f"cap on line {lineno} references undeclared {ref!r}")
    rnames = {r.name for r in resistors}
    for f in filters:
        if f.load is not None and f.load not in rnames:
            raise DanglingReference(f"filter {f.name!r} load {f.load!r} is not a declared resistor")

    spec = CircuitSpec(
        qubits=tuple(sorted(qubits, key=lambda q: q.name)),
        resistors=tuple(sorted(resistors, key=lambda r: r.name)),
        filters=tuple(sorted(filters, key=lambda f: f.name)),
        couplings=tuple(sorted(couplings, key=lambda c: (c.a, c.b, c.C))),
    )
    return CircuitSpec(spec.qubits, spec.resistors, spec.filters, spec.couplings,
                       classify(spec))


def serialize(spec: CircuitSpec) -> str:
    """Canonical text form: sorted by kind then name, SI values, 17 digits."""
    lines = []
    for q in sorted(spec.qubits, key=lambda q: q.name):
        lines.append(f"qubit {q.name} omega={_fmt(q.omega)} C={_fmt(q.C)}")
    for r in sorted(spec.resistors, key=lambda r: r.name):
        lines.append(f"resistor {r.name} R={_fmt(r.R)} cutoff_omega={_fmt(r.omega_c)} T={_fmt(r.T)}")
    for f in sorted(spec.filters, key=lambda f: f.name):
        load = f" load={f.load}" if f.load is not None else ""
        lines.append(f"filter {f.name} C={_fmt(f.C_f)} L={_fmt(f.L_f)}{load}")
    for c in sorted(spec.couplings, key=lambda c: (c.a, c.b, c.C)):
        lines.append(f"cap {c.a} {c.b} C={_fmt(c.C)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# topology


def classify(spec: CircuitSpec) -> TopologyClass:
    """Match the coupling graph against the five supported circuit shapes."""
    Q = {q.name for q in spec.qubits}
    R = {r.name for r in spec.resistors}
    F = {f.name for f in spec.filters}
    edges = [frozenset((c.a, c.b)) for c in spec.couplings]
    if len(set(edges)) != len(edges):
        return TopologyClass.Unsupported
    edges = set(edges)
    loads = {f.name: f.load for f in spec.filters}

    def kinds(e):
        return sorted("q" if n in Q else "r" if n in R else "f" for n in e)

    qr = [e for e in edges if kinds(e) == ["q", "r"]]
    qq = [e for e in edges if kinds(e) == ["q", "q"]]
    qf = [e for e in edges if kinds(e) == ["f", "q"]]
    other = len(edges) - len(qr) - len(qq) - len(qf)
    if other:
        return TopologyClass.Unsupported

    if len(Q) == 1 and not F and len(R) == 1 and len(qr) == 1 and len(edges) == 1:
        return TopologyClass.SingleQubitBath
    if (len(Q) == 1 and len(F) == 1 and len(R) == 1 and len(qf) == 1 and len(edges) == 1
            and loads[next(iter(F))] in R):
        return TopologyClass.SingleQubitFilteredBath
    if F or len(Q) != 2:
        return TopologyClass.Unsupported
    if len(R) == 1 and len(qr) == 2 and len(edges) == 2:
        return TopologyClass.TwoQubitCommonBath
    if len(R) == 1 and len(qr) == 2 and len(qq) == 1 and len(edges) == 3:
        return TopologyClass.TwoQubitCommonBathDirect
    if len(R) == 2 and len(qr) == 2 and len(edges) - len(qq) == 2:
        # each qubit on its own resistor
        qubits_hit = {n for e in qr for n in e if n in Q}
        res_hit = {n for e in qr for n in e if n in R}
        if qubits_hit == Q and res_hit == R:
            return TopologyClass.TwoQubitSeparateBaths
    return TopologyClass.Unsupported


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class RatioEntry:
    coupling: tuple[str, str]
    element: str
    ratio: float


@dataclass
class ValidationReport:
    topology: TopologyClass
    ratios: list[RatioEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def level(self) -> str:
        if self.errors:
            return "ERROR"
        return "WARN" if self.warnings else "OK"

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.ratios), default=0.0)

    def to_dict(self):
        return {
            "topology": self.topology.value,
            "level": self.level,
            "ratios": [{"coupling": list(r.coupling), "element": r.element, "ratio": r.ratio}
                       for r in self.ratios],
            "warnings": list(self.warnings),
            "errors": list(self.errors),
        }


def validate(spec: CircuitSpec) -> ValidationReport:
    report = ValidationReport(spec.topology)
    caps = {}
    for q in spec.qubits:
        caps[q.name] = q.C
    for f in spec.filters:
        caps[f.name] = f.C_f
    for c in spec.couplings:
        for end in (c.a, c.b):
            if end in caps:
                ratio = c.C / caps[end]
                report.ratios.append(RatioEntry((c.a, c.b), end, ratio))
                if ratio > WEAK_COUPLING_WARN:
                    report.warnings.append(
                        f"weak coupling violated: C({c.a},{c.b})/C({end}) = {ratio:.4g} > {WEAK_COUPLING_WARN}")
    if spec.topology is TopologyClass.Unsupported:
        report.errors.append("circuit does not match any supported topology")
    return report
