"""GKSL generators for the supported topologies, RK4 evolution and steady states.

Qubit basis is (|g>, |e>) per qubit, two-qubit states are ``kron(A, B)``
ordered gg, ge, eg, ee.  Hamiltonians are in joules, rates in 1/s.

The Lamb shift is not modelled (zero unless supplied as ``lamb_shift``).
Common-bath dissipators are only built for resonant qubits; with a direct
C_c coupling the dissipator is still written in the bare qubit basis, which
ignores the hybridization of the eigenmodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar as HBAR

from .errors import (
    DegenerateKernel,
    InvariantBreach,
    NegativeRate,
    StepSizeUnderflow,
    UnsupportedRegime,
    UnsupportedTopology,
)
from .netlist import TopologyClass
from .spectra import ThermalParams, bose_einstein

DETUNING_TOL = 1e-6
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9
STEP_TOL = 1e-8
KERNEL_RTOL = 1e-12

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
SIGMA_Y = -1j * SIGMA_PLUS + 1j * SIGMA_MINUS
I2 = np.eye(2, dtype=complex)


def embed(op, j, n):
    """Operator ``op`` acting on qubit ``j`` of ``n``."""
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, op if k == j else I2)
    return out


def decay_rates(J, omega, thermal: ThermalParams):
    """(Gamma_down, Gamma_up) = pi J (coth(x/2) +- 1) = 2 pi J (n+1), 2 pi J n."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    jw = float(J(omega))
    n = bose_einstein(omega, thermal)
    return 2.0 * np.pi * jw * (n + 1.0), 2.0 * np.pi * jw * n


@dataclass
class LindbladGenerator:
    H: np.ndarray
    jumps: list = field(default_factory=list)  # [(operator, rate)]
    gamma_down: np.ndarray | None = None  # common-bath rate matrices
    gamma_up: np.ndarray | None = None
    channel_omega: dict = field(default_factory=dict)  # label -> omega
    rates: dict = field(default_factory=dict)  # label -> (down, up)

    @property
    def dim(self):
        return self.H.shape[0]

    def superoperator(self):
        """Row-major vectorized generator: d vec(rho)/dt = L vec(rho)."""
        d = self.dim
        eye = np.eye(d)
        L = -1j / HBAR * (np.kron(self.H, eye) - np.kron(eye, self.H.T))
        for op, rate in self.jumps:
            if rate == 0:
                continue
            ad = op.conj().T
            ada = ad @ op
            L += rate * (np.kron(op, op.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
        return L

    def __call__(self, rho):
        L = self.superoperator()
        return (L @ rho.reshape(-1)).reshape(rho.shape)


def _jumps_from_matrix(G, lowering):
    """Diagonalize a Hermitian PSD rate matrix into weighted collective jumps."""
    G = 0.5 * (G + G.conj().T)
    w, V = np.linalg.eigh(G)
    if w.min() < -1e-12 * max(abs(w).max(), 1e-300):
        raise NegativeRate("rate matrix is not positive semidefinite")
    out = []
    for k in range(w.size):
        if w[k] <= 0:
            continue
        out.append((sum(V[j, k] * lowering[j] for j in range(len(lowering))), float(w[k])))
    return out


def build_generator(model, lamb_shift=None, detuning_tol=DETUNING_TOL) -> LindbladGenerator:
    topo = model.topology
    n = len(model.qubits)
    H = sum(HBAR * model.omega[j] / 2.0 * embed(SIGMA_Z, j, n) for j in range(n))
    if n == 2 and model.direct_coupling:
        H = H + model.direct_coupling * np.kron(SIGMA_Y, SIGMA_Y)
    if lamb_shift is not None:
        H = H + np.asarray(lamb_shift, dtype=complex)
    gen = LindbladGenerator(H=np.asarray(H, dtype=complex))
    lower = [embed(SIGMA_MINUS, j, n) for j in range(n)]
    raise_ = [embed(SIGMA_PLUS, j, n) for j in range(n)]

    if topo in (TopologyClass.SingleQubitBath, TopologyClass.SingleQubitFilteredBath,
                TopologyClass.TwoQubitSeparateBaths):
        for (q, bath), dens in model.densities.items():
            j = model.qubits.index(q)
            down, up = decay_rates(dens, model.omega[j], model.thermal[bath])
            if down < 0 or up < 0:
                raise NegativeRate(f"negative rate on channel {q}/{bath}")
            gen.jumps += [(lower[j], down), (raise_[j], up)]
            gen.rates[(q, bath)] = (down, up)
            gen.channel_omega[(q, bath)] = float(model.omega[j])
        return gen

    if topo in (TopologyClass.TwoQubitCommonBath, TopologyClass.TwoQubitCommonBathDirect):
        wA, wB = model.omega
        if abs(wA - wB) / wA >= detuning_tol:
            raise UnsupportedRegime(
                f"common bath with detuned qubits (|dw|/w = {abs(wA - wB) / wA:.3g}); "
                "only the resonant case is implemented")
        bath = model.bath_names[0]
        omega = float(wA)
        thermal = model.thermal[bath]
        down_j, up_j, sign = np.zeros(2), np.zeros(2), np.zeros(2)
        for j, q in enumerate(model.qubits):
            dens = model.densities.get((q, bath))
            if dens is None:
                continue
            down_j[j], up_j[j] = decay_rates(dens, omega, thermal)
            sign[j] = np.sign(model.weights[(q, bath)])
            gen.rates[(q, bath)] = (down_j[j], up_j[j])
            gen.channel_omega[(q, bath)] = omega
        # identical bath spectrum sampled by both qubits: rank-one correlations
        gd = np.outer(sign * np.sqrt(down_j), sign * np.sqrt(down_j))
        gu = np.outer(sign * np.sqrt(up_j), sign * np.sqrt(up_j))
        gen.gamma_down, gen.gamma_up = gd, gu
        gen.jumps += _jumps_from_matrix(gd, lower) + _jumps_from_matrix(gu, raise_)
        return gen

    raise UnsupportedTopology(f"no master equation for {topo}")


# ---------------------------------------------------------------------------
# states


def ket(label):
    """Basis ket from a string such as ``"e"`` or ``"eg"`` (qubit order)."""
    v = np.array([1.0 + 0j])
    for ch in label:
        v = np.kron(v, np.array([1, 0], dtype=complex) if ch == "g" else np.array([0, 1], dtype=complex))
    return v


def initial_state(name, n_qubits):
    """ground, excited, bell-plus = (|eg>+|ge>)/sqrt2, bell-minus = (|eg>-|ge>)/sqrt2."""
    if name == "ground":
        v = ket("g" * n_qubits)
    elif name == "excited":
        v = ket("e" * n_qubits)
    elif name in ("bell-plus", "bell-minus"):
        if n_qubits != 2:
            raise ValueError(f"{name} needs two qubits")
        s = 1.0 if name == "bell-plus" else -1.0
        v = (ket("eg") + s * ket("ge")) / np.sqrt(2.0)
    else:
        raise ValueError(f"unknown initial state {name!r}")
    return np.outer(v, v.conj())


def populations_labels(n_qubits):
    labels = [""]
    for _ in range(n_qubits):
        labels = [l + c for l in labels for c in "ge"]
    return ["p_" + l for l in labels]


# ---------------------------------------------------------------------------
# evolution


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    trace_dev: np.ndarray
    min_eig: np.ndarray
    purity: np.ndarray
    step: float

    @property
    def populations(self):
        return np.real(np.einsum("tii->ti", self.states))


def rk4_step_matrix(L, h):
    """One classic RK4 step for d x/dt = L x, as a matrix (stages applied to I)."""
    X = np.eye(L.shape[0], dtype=complex)
    k1 = L @ X
    k2 = L @ (X + 0.5 * h * k1)
    k3 = L @ (X + 0.5 * h * k2)
    k4 = L @ (X + h * k3)
    return X + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _propagate(L, rho0, times, h):
    """Fixed-step RK4 sampled at ``times``; steps of ``h`` fitted per interval."""
    x = rho0.reshape(-1).astype(complex)
    out = [x.copy()]
    step_cache = {}
    for t0, t1 in zip(times[:-1], times[1:]):
        dt = t1 - t0
        m = max(1, int(np.ceil(dt / h - 1e-9)))
        key = (round(dt / m, 300), m)
        if key not in step_cache:
            step_cache[key] = np.linalg.matrix_power(rk4_step_matrix(L, dt / m), m)
        x = step_cache[key] @ x
        out.append(x.copy())
    d = rho0.shape[0]
    return np.array(out).reshape(len(times), d, d)


def evolve(gen: LindbladGenerator, rho0, t_grid, step=None, tol=STEP_TOL, max_halvings=40,
           check=True) -> Trajectory:
    """Integrate the master equation with RK4, halving the step until sampled
    populations move by less than ``tol``.  A given ``step`` is used as is."""
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if not np.allclose(rho0, rho0.conj().T, atol=1e-12) or abs(np.trace(rho0) - 1) > 1e-12:
        raise ValueError("rho0 must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-12:
        raise ValueError("rho0 must be positive semidefinite")
    L = gen.superoperator()
    if step is not None:
        states = _propagate(L, rho0, times, step)
        h = step
    else:
        norm = np.abs(L).sum(axis=0).max()
        spacing = np.diff(times).min() if times.size > 1 else 1.0
        h = min(spacing, 1.0 / norm) if norm > 0 else spacing
        states = _propagate(L, rho0, times, h)
        h0 = h
        for _ in range(max_halvings):
            finer = _propagate(L, rho0, times, h / 2)
            change = np.abs(np.real(np.einsum("tii->ti", finer - states))).max()
            states, h = finer, h / 2
            if change < tol:
                break
        else:
            raise StepSizeUnderflow(f"no convergence down to step {h:.3e} (start {h0:.3e})")
    states = 0.5 * (states + np.conj(np.transpose(states, (0, 2, 1))))
    trace_dev = np.abs(np.real(np.einsum("tii->t", states)) - 1.0)
    eigs = np.linalg.eigvalsh(states)
    min_eig = eigs.min(axis=1)
    purity = np.real(np.einsum("tij,tji->t", states, states))
    if check:
        if trace_dev.max() > TRACE_TOL:
            raise InvariantBreach(f"trace deviation {trace_dev.max():.3e}")
        if min_eig.min() < -POSITIVITY_TOL:
            raise InvariantBreach(f"negative eigenvalue {min_eig.min():.3e}")
    return Trajectory(times, states, trace_dev, min_eig, purity, h)


# ---------------------------------------------------------------------------
# steady state


@dataclass
class SteadyState:
    rho: np.ndarray | None
    kernel_dim: int
    basis: list
    residual: float

    @property
    def degenerate(self):
        return self.kernel_dim > 1


def _hermitian_basis(vectors, d):
    """Real-linear Hermitian spanning set of the kernel, orthonormalized."""
    mats = []
    for v in vectors:
        m = v.reshape(d, d)
        mats.append(0.5 * (m + m.conj().T))
        mats.append(0.5j * (m - m.conj().T))
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
    u, s, vt = np.linalg.svd(flat, full_matrices=False)
    keep = s > 1e-8 * s.max()
    out = []
    for row in vt[keep][:len(vectors)]:
        m = (row[:d * d] + 1j * row[d * d:]).reshape(d, d)
        tr = np.trace(m).real
        out.append(m / tr if abs(tr) > 1e-8 else m)
    return out


def steady_state(gen: LindbladGenerator, strict=False) -> SteadyState:
    L = gen.superoperator()
    d = gen.dim
    _, s, vh = np.linalg.svd(L)
    null = s < KERNEL_RTOL * s[0] if s[0] > 0 else np.ones_like(s, dtype=bool)
    kdim = int(null.sum())
    vectors = [vh[k].conj() for k in np.flatnonzero(null)]
    if kdim == 1:
        rho = vectors[0].reshape(d, d)
        rho = rho / np.trace(rho)
        rho = 0.5 * (rho + rho.conj().T)
        res = float(np.linalg.norm(L @ rho.reshape(-1)))
        return SteadyState(rho, 1, [rho], res)
    basis = _hermitian_basis(vectors, d)
    if strict:
        raise DegenerateKernel(kdim, basis)
    res = max(float(np.linalg.norm(L @ b.reshape(-1))) for b in basis) if basis else 0.0
    return SteadyState(None, kdim, basis, res)


def gibbs_state(omega, thermal: ThermalParams):
    """Two-level thermal state in the (|g>, |e>) basis."""
    if thermal.T == 0:
        pe = 0.0
    else:
        pe = 1.0 / (1.0 + np.exp(float(thermal.x(omega))))
    return np.diag([1.0 - pe, pe]).astype(complex)


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()
