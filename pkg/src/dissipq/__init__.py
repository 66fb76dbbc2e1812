"""Dissipation in superconducting qubit circuits: circuit netlists, Foster
baths, noise spectra, system-bath Hamiltonians, Lindblad dynamics and exact
finite-bath oracles."""

from .errors import DissipqError
from .foster import FosterBath, ohmic_bath, recompose, synthesize
from .hamiltonian import strong_coupling_normal_modes, weak_coupling_model
from .lindblad import build_generator, evolve, steady_state
from .netlist import CircuitSpec, TopologyClass, parse_netlist, validate
from .spectra import ThermalParams, voltage_psd

__version__ = "0.1.0"

__all__ = [
    "CircuitSpec", "DissipqError", "FosterBath", "ThermalParams", "TopologyClass",
    "build_generator", "evolve", "ohmic_bath", "parse_netlist", "recompose",
    "steady_state", "strong_coupling_normal_modes", "synthesize", "validate",
    "voltage_psd", "weak_coupling_model",
]
