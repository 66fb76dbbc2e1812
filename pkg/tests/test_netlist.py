import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipq.errors import (
    DanglingReference,
    DuplicateName,
    NetlistSyntaxError,
    NonPositiveValue,
    UnsupportedUnit,
)
from dissipq.netlist import (
    TopologyClass,
    classify,
    parse_netlist,
    parse_value,
    serialize,
    validate,
)

from conftest import load


def test_single_qubit_example():
    spec = parse_netlist("qubit A freq=5GHz C=80fF\nresistor R1 R=50ohm cutoff=100GHz T=50mK\ncap A R1 Cg=1fF")
    assert spec.topology is TopologyClass.SingleQubitBath
    (q,) = spec.qubits
    assert q.omega == 2 * math.pi * 5e9
    assert q.C == 80e-15
    (r,) = spec.resistors
    assert (r.R, r.T) == (50.0, 0.05)
    assert r.omega_c == 2 * math.pi * 100e9
    assert spec.couplings[0].C == 1e-15


def test_empty_input():
    with pytest.raises(NetlistSyntaxError, match="no elements declared"):
        parse_netlist("")
    with pytest.raises(NetlistSyntaxError):
        parse_netlist("# only a comment\n\n")


@pytest.mark.parametrize("token,quantity,value", [
    ("5GHz", "frequency", 2 * math.pi * 5e9),
    ("250MHz", "frequency", 2 * math.pi * 250e6),
    ("3.5e10", "angular", 3.5e10),
    ("80fF", "capacitance", 80e-15),
    ("1.5pF", "capacitance", 1.5e-12),
    ("2nH", "inductance", 2e-9),
    ("500pH", "inductance", 500e-12),
    ("50ohm", "resistance", 50.0),
    ("1.2kohm", "resistance", 1200.0),
    ("50mK", "temperature", 0.05),
    ("4K", "temperature", 4.0),
])
def test_unit_suffixes(token, quantity, value):
    assert parse_value(token, quantity) == value


def test_unit_scaling_is_exact_decimal():
    # 0.1 fF must be the double nearest 1e-16, not 0.1 * 1e-15
    assert parse_value("0.1fF", "capacitance") == 1e-16
    assert parse_value("0.7fF", "capacitance") == 7e-16


def test_syntax_error_position():
    with pytest.raises(NetlistSyntaxError) as info:
        parse_netlist("qubit A freq=5GHz C=80fF\nresistor R1 R=50ohm cutoff=100GHz T=0K bogus\n")
    assert info.value.line == 2
    assert info.value.column == 40


def test_unknown_kind_position():
    with pytest.raises(NetlistSyntaxError) as info:
        parse_netlist("  inductor L1 L=1nH")
    assert (info.value.line, info.value.column) == (1, 3)


@pytest.mark.parametrize("text,exc", [
    ("qubit A freq=5GHz C=80fF\nqubit A freq=6GHz C=80fF", DuplicateName),
    ("qubit A freq=5GHz C=80fF\ncap A R9 Cg=1fF", DanglingReference),
    ("qubit A freq=5GHz C=-80fF", NonPositiveValue),
    ("qubit A freq=0GHz C=80fF", NonPositiveValue),
    ("resistor R1 R=0ohm cutoff=100GHz T=0K", NonPositiveValue),
    ("resistor R1 R=50ohm cutoff=100GHz T=-1mK", NonPositiveValue),
    ("qubit A freq=5THz C=80fF", UnsupportedUnit),
    ("qubit A freq=5GHz C=80nH", UnsupportedUnit),
    ("qubit A freq=5GHz", NetlistSyntaxError),
    ("qubit A freq=5GHz C=80fF C=1fF", NetlistSyntaxError),
    ("resistor R1 R=50ohm cutoff=100GHz T=0K\nfilter F1 C=1pF L=1nH load=R2", DanglingReference),
])
def test_errors(text, exc):
    with pytest.raises(exc):
        parse_netlist(text)


def test_zero_temperature_allowed():
    spec = parse_netlist("qubit A freq=5GHz C=80fF\nresistor R1 R=50ohm cutoff=100GHz T=0K\ncap A R1 Cg=1fF")
    assert spec.resistors[0].T == 0.0


# reference adjacency table; R2 is declared only when a body uses it
_R1 = "resistor R1 R=50ohm cutoff=100GHz T=0K\n"
_R2 = "resistor R2 R=50ohm cutoff=100GHz T=0K\n"
CLASSES = [
    ("qubit A freq=5GHz C=80fF\ncap A R1 Cg=1fF", TopologyClass.SingleQubitBath),
    ("qubit A freq=5GHz C=80fF\nfilter F1 C=20pF L=50pH load=R1\ncap A F1 Cg=1fF",
     TopologyClass.SingleQubitFilteredBath),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap B R1 Cg=1fF",
     TopologyClass.TwoQubitCommonBath),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap B R1 Cg=1fF\ncap A B Cc=1fF",
     TopologyClass.TwoQubitCommonBathDirect),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap B R2 Cg=1fF",
     TopologyClass.TwoQubitSeparateBaths),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap B R2 Cg=1fF\ncap A B Cc=1fF",
     TopologyClass.TwoQubitSeparateBaths),
    # rejected shapes
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\nqubit C freq=5GHz C=80fF\n"
     "cap A R1 Cg=1fF\ncap B R1 Cg=1fF\ncap C R1 Cg=1fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap A R2 Cg=1fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\ncap R1 R2 C=1fF\ncap A R1 Cg=1fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\ncap A R1 Cg=1fF\ncap R1 A Cg=2fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A R1 Cg=1fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\nqubit B freq=5GHz C=80fF\ncap A B Cc=1fF", TopologyClass.Unsupported),
    ("qubit A freq=5GHz C=80fF\nfilter F1 C=20pF L=50pH load=R1\ncap A F1 Cg=1fF\ncap A R2 Cg=1fF",
     TopologyClass.Unsupported),
]


@pytest.mark.parametrize("body,expected", CLASSES)
def test_classification_table(body, expected):
    spec = parse_netlist(_R1 + (_R2 if "R2" in body else "") + body)
    assert spec.topology is expected
    assert classify(spec) is expected


@pytest.mark.parametrize("name,expected", [
    ("single_qubit.dq", TopologyClass.SingleQubitBath),
    ("filtered.dq", TopologyClass.SingleQubitFilteredBath),
    ("common.dq", TopologyClass.TwoQubitCommonBath),
    ("common_direct.dq", TopologyClass.TwoQubitCommonBathDirect),
    ("separate.dq", TopologyClass.TwoQubitSeparateBaths),
    ("unsupported.dq", TopologyClass.Unsupported),
])
def test_shipped_netlists(name, expected):
    assert load(name).topology is expected


def test_validate_ratios():
    ok = validate(parse_netlist("qubit A freq=5GHz C=80fF\nresistor R1 R=50ohm cutoff=100GHz T=0K\ncap A R1 Cg=1fF"))
    assert ok.level == "OK"
    assert ok.max_ratio == pytest.approx(0.0125, rel=1e-15)
    warn = validate(parse_netlist("qubit A freq=5GHz C=80fF\nresistor R1 R=50ohm cutoff=100GHz T=0K\ncap A R1 Cg=20fF"))
    assert warn.level == "WARN"
    assert warn.max_ratio == pytest.approx(0.25)
    assert "weak coupling violated" in warn.warnings[0]
    err = validate(load("unsupported.dq"))
    assert err.level == "ERROR"


def test_direct_coupling_ratio_reported():
    rep = validate(load("common_direct.dq"))
    cc = [r for r in rep.ratios if set(r.coupling) == {"A", "B"}]
    assert len(cc) == 2
    assert cc[0].ratio == pytest.approx(0.2 / 80)


# ---------------------------------------------------------------------------
# round trip

_freq = st.sampled_from(["GHz", "MHz", ""])


def _num(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False).map(lambda x: f"{x:.6g}")


@st.composite
def netlists(draw):
    n_q = draw(st.integers(1, 2))
    lines = []
    for name in ["A", "B"][:n_q]:
        unit = draw(_freq)
        f = float(draw(_num(1, 10))) * {"GHz": 1, "MHz": 1e3, "": 1e9}[unit]
        lines.append(f"qubit {name} freq={f:.6g}{unit} C={draw(_num(20, 200))}fF")
    n_r = draw(st.integers(1, 2)) if n_q == 2 else 1
    for k in range(n_r):
        T = draw(st.sampled_from(["0K", "20mK", "1.5K"]))
        lines.append(f"resistor R{k + 1} R={draw(_num(10, 1000))}ohm cutoff={draw(_num(50, 500))}GHz T={T}")
    if n_q == 1 and draw(st.booleans()):
        lines.append(f"filter F1 C={draw(_num(1, 30))}pF L={draw(_num(10, 500))}pH load=R1")
        lines.append(f"cap A F1 Cg={draw(_num(0.1, 5))}fF")
    else:
        for k, q in enumerate(["A", "B"][:n_q]):
            lines.append(f"cap {q} R{min(k, n_r - 1) + 1} Cg={draw(_num(0.1, 5))}fF")
        if n_q == 2 and draw(st.booleans()):
            lines.append(f"cap A B Cc={draw(_num(0.01, 2))}fF")
    order = draw(st.permutations(lines))
    return "\n".join(order) + "\n"


@settings(max_examples=200, deadline=None)
@given(netlists())
def test_round_trip(text):
    spec = parse_netlist(text)
    canon = serialize(spec)
    again = parse_netlist(canon)
    assert again == spec
    assert serialize(again) == canon
    assert spec.topology is not TopologyClass.Unsupported


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=80))
def test_parser_never_crashes(text):
    try:
        parse_netlist(text)
    except Exception as exc:  # only package errors are allowed
        from dissipq.errors import NetlistError
        assert isinstance(exc, NetlistError), repr(exc)
