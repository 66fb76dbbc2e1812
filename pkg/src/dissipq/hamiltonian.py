"""Capacitance matrices, point transformation and system-bath Hamiltonians.

Node ordering is qubits (sorted by name) followed by the Foster modes of each
resistor (sorted by name).  Every supported circuit has the block form

    C = [[S,          -a_k e^T ...],
         [-e a_k^T,   C_k + c_k e e^T], ...]

with one coupling vector ``a_k`` (farads, one entry per qubit) and one
scalar ``c_k`` per resistor.  An LC filter in front of the resistor adds
``C_f`` to ``c_k`` and ``1/L_f`` as a rank-one term of the bath inductance
block (its node flux is the sum of the chain fluxes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar as HBAR

from . import foster as _foster
from .errors import (
    SingularBlock,
    SingularTransform,
    UnsupportedTopology,
    WeakCouplingViolated,
)
from .netlist import CircuitSpec, TopologyClass, validate
from .spectra import OhmicBathDensity, ThermalParams, ohmic_gamma

EIG_FLOOR = 1e-18
DEGENERACY_RTOL = 1e-10

_SINGLE_BATH = (
    TopologyClass.SingleQubitBath,
    TopologyClass.SingleQubitFilteredBath,
    TopologyClass.TwoQubitCommonBath,
    TopologyClass.TwoQubitCommonBathDirect,
)


# ---------------------------------------------------------------------------
# circuit blocks


@dataclass(frozen=True)
class BathPort:
    resistor: str
    a: np.ndarray  # coupling capacitances to each qubit, F
    c: float  # total capacitance added to e e^T in the bath block
    inv_L_extra: float = 0.0  # rank-one 1/L term (filter inductor)
    filter: tuple[float, float, float] | None = None  # (R, C_f, L_f) for |h_f|^2


@dataclass(frozen=True)
class CircuitBlocks:
    qubits: tuple[str, ...]
    S: np.ndarray
    ports: tuple[BathPort, ...]


def circuit_blocks(spec: CircuitSpec) -> CircuitBlocks:
    topo = spec.topology
    if topo is TopologyClass.Unsupported:
        raise UnsupportedTopology("circuit does not match a supported topology")
    qs = [q.name for q in spec.qubits]
    n = len(qs)
    S = np.diag([q.C for q in spec.qubits]).astype(float)
    for i, qi in enumerate(qs):
        for j, qj in enumerate(qs):
            if i < j:
                cc = spec.coupling(qi, qj)
                S[i, i] += cc
                S[j, j] += cc
                S[i, j] -= cc
                S[j, i] -= cc
    ports = []
    if topo is TopologyClass.SingleQubitFilteredBath:
        f = spec.filters[0]
        r = spec.element(f.load)
        cg = spec.coupling(qs[0], f.name)
        S[0, 0] += cg
        ports.append(BathPort(r.name, np.array([cg]), cg + f.C_f, 1.0 / f.L_f, (r.R, f.C_f, f.L_f)))
    else:
        for r in spec.resistors:
            a = np.array([spec.coupling(q, r.name) for q in qs])
            for i in range(n):
                S[i, i] += a[i]
            ports.append(BathPort(r.name, a, float(a.sum())))
    return CircuitBlocks(tuple(qs), S, tuple(ports))


# ---------------------------------------------------------------------------
# capacitance matrix


@dataclass(frozen=True)
class CapacitanceMatrix:
    matrix: np.ndarray
    n_sys: int
    blocks: CircuitBlocks
    bath_C: tuple[np.ndarray, ...]  # diagonal Foster capacitances per port
    bath_slices: tuple[slice, ...]

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return True


def _baths_for(spec, baths):
    if isinstance(baths, _foster.FosterBath):
        baths = [baths]
    if isinstance(baths, dict):
        return baths
    blocks_names = [r.name for r in spec.resistors]
    if len(baths) != len(blocks_names):
        raise ValueError(f"expected {len(blocks_names)} bath(s), got {len(baths)}")
    return dict(zip(blocks_names, baths))


def build_capacitance_matrix(spec: CircuitSpec, baths) -> CapacitanceMatrix:
    blocks = circuit_blocks(spec)
    baths = _baths_for(spec, baths)
    n = blocks.S.shape[0]
    sizes = [baths[p.resistor].N for p in blocks.ports]
    dim = n + sum(sizes)
    C = np.zeros((dim, dim))
    C[:n, :n] = blocks.S
    slices, bath_C = [], []
    off = n
    for p, size in zip(blocks.ports, sizes):
        sl = slice(off, off + size)
        cj = baths[p.resistor].C
        C[sl, sl] = np.diag(cj) + p.c
        C[:n, sl] = -p.a[:, None]
        C[sl, :n] = -p.a[None, :]
        slices.append(sl)
        bath_C.append(cj)
        off += size
    return CapacitanceMatrix(C, n, blocks, tuple(bath_C), tuple(slices))


def build_inverse_inductance(spec: CircuitSpec, baths) -> np.ndarray:
    blocks = circuit_blocks(spec)
    baths = _baths_for(spec, baths)
    n = blocks.S.shape[0]
    dim = n + sum(baths[p.resistor].N for p in blocks.ports)
    Linv = np.zeros((dim, dim))
    off = n
    for p in blocks.ports:
        b = baths[p.resistor]
        sl = slice(off, off + b.N)
        Linv[sl, sl] = np.diag(1.0 / b.L) + p.inv_L_extra
        off += b.N
    return Linv


# ---------------------------------------------------------------------------
# structured inverse


@dataclass(frozen=True)
class StructuredP:
    """P = [[S, b a f^T], [b f a^T, I + d f f^T]]."""

    S: np.ndarray
    b: float
    a: np.ndarray
    f: np.ndarray
    d: float

    def dense(self):
        n, m = self.S.shape[0], self.f.size
        P = np.empty((n + m, n + m))
        P[:n, :n] = self.S
        P[:n, n:] = self.b * np.outer(self.a, self.f)
        P[n:, :n] = P[:n, n:].T
        P[n:, n:] = np.eye(m) + self.d * np.outer(self.f, self.f)
        return P


@dataclass(frozen=True)
class StructuredInverse:
    """P^-1 = [[A, u f^T], [f u^T, I + k f f^T]]."""

    A: np.ndarray
    u: np.ndarray
    f: np.ndarray
    k: float
    D: float

    def dense(self):
        n, m = self.A.shape[0], self.f.size
        X = np.empty((n + m, n + m))
        X[:n, :n] = self.A
        X[:n, n:] = np.outer(self.u, self.f)
        X[n:, :n] = X[:n, n:].T
        X[n:, n:] = np.eye(m) + self.k * np.outer(self.f, self.f)
        return X


def block_inverse(P: StructuredP) -> StructuredInverse:
    S_inv = np.linalg.inv(P.S)
    s = S_inv @ P.a
    q = float(P.a @ s)  # a^T S^-1 a
    f2 = float(P.f @ P.f)
    D = 1.0 + f2 * (P.d - P.b**2 * q)
    scale = 1.0 + f2 * (abs(P.d) + P.b**2 * abs(q))
    if abs(D) < 1e-14 * scale:
        raise SingularBlock(f"D = {D:.3e} vanishes")
    A = S_inv + (P.b**2 * f2 / D) * np.outer(s, s)
    u = -(P.b / D) * s
    k = (P.b**2 * q - P.d) / D
    return StructuredInverse(A, u, P.f.copy(), k, D)


def sherman_morrison_inverse(c_diag, xi):
    """(diag(c) + xi e e^T)^-1 in closed form."""
    ci = 1.0 / np.asarray(c_diag, dtype=float)
    return np.diag(ci) - xi * np.outer(ci, ci) / (1.0 + xi * ci.sum())


def f_norm_sq(c_diag, xi, M0):
    """|f|^2 = M0 e^T C^-1 e / (1 + xi e^T C^-1 e)."""
    s = float(np.sum(1.0 / np.asarray(c_diag, dtype=float)))
    return M0 * s / (1.0 + xi * s)


# ---------------------------------------------------------------------------
# point transformation


def decoupling_xi(S, a, c):
    """xi that makes the bath block of C_z^-1 proportional to the identity.

    Equals C_g - C_g^2/C_Sigma for one qubit and 2 C_g - Tr(S^-1) C_g^2 for two
    balanced qubits without direct coupling.
    """
    return float(c - a @ np.linalg.solve(S, a))


def sym_sqrt(M, inverse=False):
    w, V = np.linalg.eigh(M)
    floor = EIG_FLOOR * np.linalg.norm(M, 2)
    if w.min() <= -floor * 1e6:
        raise SingularTransform("matrix is not positive definite")
    w = np.maximum(w, floor)
    p = -0.5 if inverse else 0.5
    return (V * w**p) @ V.T


@dataclass(frozen=True)
class PointTransform:
    xi: float
    M0: float
    Z: np.ndarray
    C_z: np.ndarray
    f: np.ndarray
    M_inv_half: np.ndarray


def point_transform(C: CapacitanceMatrix, xi: float | None = None, M0: float | None = None) -> PointTransform:
    """Apply z = Z phi with Z = diag(1, M0^-1/2 M^1/2), M = C_bath + xi e e^T."""
    if len(C.bath_C) != 1:
        raise UnsupportedTopology("point transformation needs exactly one bath port")
    port = C.blocks.ports[0]
    if xi is None:
        xi = decoupling_xi(C.blocks.S, port.a, port.c)
    if M0 is None:
        M0 = default_M0(C.blocks.S)
    cj = C.bath_C[0]
    M = np.diag(cj) + xi
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise SingularTransform("C_bath + xi e e^T is not positive definite") from None
    M_half = sym_sqrt(M)
    M_ih = sym_sqrt(M, inverse=True)
    n = C.n_sys
    dim = C.matrix.shape[0]
    Z = np.eye(dim)
    Z[n:, n:] = M_half / math.sqrt(M0)
    Zi = np.eye(dim)
    Zi[n:, n:] = M_ih * math.sqrt(M0)
    C_z = Zi @ C.matrix @ Zi
    f = math.sqrt(M0) * M_ih.sum(axis=1)
    return PointTransform(float(xi), float(M0), Z, C_z, f, M_ih)


def default_M0(S):
    """Geometric mean of the qubit self-capacitances (diagonal of S)."""
    return float(np.exp(np.mean(np.log(np.diag(S)))))


def transformed_structure(blocks: CircuitBlocks, port: BathPort, f, xi, M0):
    """C_z = T P T with T = diag(1, sqrt(M0)); returns (P, sqrt(M0))."""
    ft = f / math.sqrt(M0)
    return StructuredP(blocks.S, -1.0, port.a, ft, port.c - xi), math.sqrt(M0)


# ---------------------------------------------------------------------------
# weak-coupling model


@dataclass
class SystemBathModel:
    topology: TopologyClass
    qubits: tuple[str, ...]
    omega: np.ndarray  # dressed qubit frequencies, rad/s
    inv_cap: np.ndarray  # S^-1_jj
    lam: np.ndarray  # charge scale, C
    direct_coupling: float  # S^-1_12 lam_A lam_B, J
    weights: dict  # (qubit, bath) -> dimensionless C_g-ratio weight
    densities: dict  # (qubit, bath) -> OhmicBathDensity
    thermal: dict  # bath -> ThermalParams
    baths: dict = field(default_factory=dict)  # bath -> FosterBath
    S_inv: np.ndarray | None = None
    weak_ratios: list = field(default_factory=list)

    @property
    def bath_names(self):
        return tuple(self.thermal)

    def couplings(self, qubit, bath):
        """g_{j,alpha} in joules for H_I = i g sigma^y (a^dag - a)."""
        w = self.weights.get((qubit, bath), 0.0)
        b = self.baths[bath]
        j = self.qubits.index(qubit)
        g = w * self.lam[j] * np.sqrt(HBAR * b.omega / (2.0 * b.C))
        dens = self.densities.get((qubit, bath))
        if dens is not None and dens.filter is not None:
            from .spectra import filter_transfer_sq
            g = g * np.sqrt(filter_transfer_sq(*dens.filter, b.omega))
        return g

    def gamma(self, qubit, bath):
        d = self.densities.get((qubit, bath))
        return 0.0 if d is None else d.gamma


def _default_baths(spec: CircuitSpec):
    wmax = max(q.omega for q in spec.qubits)
    dw, N = _foster.default_grid(wmax)
    return {r.name: _foster.ohmic_bath(r.R, r.omega_c, dw, N) for r in spec.resistors}


def weak_coupling_model(spec: CircuitSpec, baths=None, strict=False) -> SystemBathModel:
    """First-order (in C_g/C_j) system-bath model for a supported topology."""
    report = validate(spec)
    if spec.topology is TopologyClass.Unsupported:
        raise UnsupportedTopology("; ".join(report.errors))
    if strict and report.level != "OK":
        raise WeakCouplingViolated("; ".join(report.warnings))
    baths = _default_baths(spec) if baths is None else _baths_for(spec, baths)
    blocks = circuit_blocks(spec)
    S_inv = np.linalg.inv(blocks.S)
    omega = np.array([q.omega for q in spec.qubits])
    inv_cap = np.diag(S_inv).copy()
    lam = np.sqrt(HBAR * omega / (2.0 * inv_cap))
    direct = float(S_inv[0, 1] * lam[0] * lam[1]) if len(lam) == 2 else 0.0
    resistors = {r.name: r for r in spec.resistors}

    weights, densities, thermal = {}, {}, {}
    separate = spec.topology is TopologyClass.TwoQubitSeparateBaths
    for port in blocks.ports:
        r = resistors[port.resistor]
        thermal[r.name] = ThermalParams(r.T)
        w = np.diag(S_inv) * port.a if separate else S_inv @ port.a
        for j, q in enumerate(blocks.qubits):
            if w[j] == 0.0:
                continue
            weights[(q, r.name)] = float(w[j])
            densities[(q, r.name)] = OhmicBathDensity(
                ohmic_gamma(r.R, lam[j], w[j]), r.omega_c, port.filter)
    return SystemBathModel(
        topology=spec.topology,
        qubits=blocks.qubits,
        omega=omega,
        inv_cap=inv_cap,
        lam=lam,
        direct_coupling=direct,
        weights=weights,
        densities=densities,
        thermal=thermal,
        baths=baths,
        S_inv=S_inv,
        weak_ratios=report.ratios,
    )


# ---------------------------------------------------------------------------
# strong coupling: numerical normal modes


@dataclass
class NormalModeModel:
    qubits: tuple[str, ...]
    xi: float
    M0: float
    inv_cap_renorm: np.ndarray  # system block of C_z'^-1
    inv_cap_bare: np.ndarray  # S^-1
    omega: np.ndarray  # bath normal-mode frequencies
    f: np.ndarray  # coupling vector before rotation
    f_prime: np.ndarray  # rotated coupling vector
    coupling_vector: np.ndarray  # K_j: C_z^-1 system-bath block = K f^T
    lam: np.ndarray
    degenerate: list = field(default_factory=list)

    @property
    def renormalized_omega_ratio(self):
        """omega_j(renorm)/omega_j(bare) for a transmon, sqrt of the E_C ratio."""
        return np.sqrt(np.diag(self.inv_cap_renorm) / np.diag(self.inv_cap_bare))

    def spectral_weights(self):
        return self.omega * self.f_prime**2 / self.M0

    def couplings(self, j=0):
        """Per-mode g (J) of qubit j for H_I = i g sigma^y (a^dag - a)."""
        return self.coupling_vector[j] * self.f_prime * np.sqrt(HBAR * self.M0 * self.omega / 2.0) * self.lam[j]


def strong_coupling_normal_modes(spec: CircuitSpec, bath, M0: float | None = None) -> NormalModeModel:
    if spec.topology not in _SINGLE_BATH:
        raise UnsupportedTopology(f"no strong-coupling path for {spec.topology.value}")
    blocks = circuit_blocks(spec)
    bath = bath if isinstance(bath, _foster.FosterBath) else next(iter(_baths_for(spec, bath).values()))
    port = blocks.ports[0]
    M0 = default_M0(blocks.S) if M0 is None else float(M0)
    xi = decoupling_xi(blocks.S, port.a, port.c)
    M = np.diag(bath.C) + xi
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise SingularTransform("C_bath + xi e e^T is not positive definite") from None
    M_ih = sym_sqrt(M, inverse=True)
    f = math.sqrt(M0) * M_ih.sum(axis=1)

    P, t = transformed_structure(blocks, port, f, xi, M0)
    inv = block_inverse(P)
    # C_z^-1 = T^-1 P^-1 T^-1
    inv_sys = inv.A
    K = inv.u / (t * t)  # u ft^T / t = (u / M0) f^T

    Lz = M0 * (M_ih * (1.0 / bath.L)) @ M_ih
    if port.inv_L_extra:
        Lz = Lz + port.inv_L_extra * np.outer(f, f)
    Lz = 0.5 * (Lz + Lz.T)
    evals, V = np.linalg.eigh(Lz)
    if evals.min() <= 0:
        raise SingularTransform("bath inductance block is not positive definite")
    omega = np.sqrt(evals / M0)
    f_prime = V.T @ f
    gaps = np.diff(evals) / evals[1:]
    degenerate = [(int(i), int(i + 1)) for i in np.flatnonzero(gaps < DEGENERACY_RTOL)]

    S_inv = np.linalg.inv(blocks.S)
    omega_q = np.array([q.omega for q in spec.qubits])
    lam = np.sqrt(HBAR * omega_q / (2.0 * np.diag(S_inv)))
    return NormalModeModel(blocks.qubits, xi, M0, inv_sys, S_inv, omega, f, f_prime, K, lam, degenerate)
