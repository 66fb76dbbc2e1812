from pathlib import Path

import pytest

from dissipq.netlist import parse_netlist

NETLISTS = Path(__file__).resolve().parent.parent / "netlists"

REFERENCE = """\
qubit    A  freq=5GHz C=80fF
resistor R1 R=50ohm cutoff=100GHz T=0K
cap      A R1 Cg=0.8fF
"""

COMMON = """\
qubit    A  freq=5GHz C=80fF
qubit    B  freq=5GHz C=80fF
resistor R1 R=50ohm cutoff=100GHz T=0K
cap      A R1 Cg=0.8fF
cap      B R1 Cg=0.8fF
"""


@pytest.fixture
def netlist_dir():
    return NETLISTS


@pytest.fixture
def reference_spec():
    return parse_netlist(REFERENCE)


@pytest.fixture
def common_spec():
    return parse_netlist(COMMON)


def load(name):
    return parse_netlist((NETLISTS / name).read_text())
