"""Exact reference dynamics of qubits coupled to a finite Foster bath.

Two oracles:

* :func:`wigner_weisskopf` diagonalizes the single-excitation sector of the
  rotating-wave Hamiltonian, ``H = hbar w_A s+s- + sum hbar w_a a+a
  - sum g_a (s+ a + s- a+)``.  This is exact at T = 0 for any N <= 5000.
* :func:`dense_bath_oracle` keeps the full ``i g s^y (a+ - a)`` coupling on a
  handful of Fock-truncated modes, starting from a thermal product state.

With the default Foster grid the mode spacing is far above a weak-coupling
decay rate, so no exponential decay is visible.  :func:`resonant_band` builds
a band of Foster modes around the qubit frequency with spacing a fixed
fraction of the Lindblad rate; N then sets the band width.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.constants import hbar as HBAR

from . import foster as _foster
from .errors import (
    CutoffTooLow,
    DimensionTooLarge,
    NonPositiveSample,
    UnsupportedRegime,
    UnsupportedTopology,
)
from .hamiltonian import SystemBathModel, weak_coupling_model
from .lindblad import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Y, build_generator, embed, ket
from .netlist import CircuitSpec
from .spectra import ThermalParams, bose_einstein

MAX_SECTOR_MODES = 5000
MAX_DENSE_DIM = 4096
MAX_DENSE_MODES = 6
MAX_FOCK_CUTOFF = 3
TAIL_LIMIT = 0.01
DEFAULT_RESOLUTION = 0.5  # band spacing in units of the Lindblad decay rate
UNITARITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# single-excitation sector


@dataclass(frozen=True)
class SingleExcitationModel:
    """RWA Hamiltonian (joules) on {qubit_j excited, vac} + {mode a excited}."""

    H: np.ndarray
    qubits: tuple[str, ...]
    mode_omega: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def _only_bath(model: SystemBathModel):
    names = model.bath_names
    if len(names) != 1:
        raise UnsupportedTopology("the single-excitation oracle needs exactly one bath")
    return names[0]


def sector_hamiltonian(model: SystemBathModel, max_modes=MAX_SECTOR_MODES) -> SingleExcitationModel:
    bath = _only_bath(model)
    b = model.baths[bath]
    if b.N > max_modes:
        raise DimensionTooLarge(f"{b.N} modes exceeds the sector limit {max_modes}")
    if model.thermal[bath].T != 0:
        raise UnsupportedRegime("the single-excitation oracle is exact only at T = 0")
    nq = len(model.qubits)
    dim = nq + b.N
    H = np.zeros((dim, dim))
    H[np.arange(nq), np.arange(nq)] = HBAR * np.asarray(model.omega)
    H[np.arange(nq, dim), np.arange(nq, dim)] = HBAR * b.omega
    for j, q in enumerate(model.qubits):
        g = np.asarray(model.couplings(q, bath), dtype=float) * np.ones(b.N)
        H[j, nq:] = -g
        H[nq:, j] = -g
    if nq == 2:
        # s^y s^y keeps s+_A s-_B + h.c. inside the sector
        H[0, 1] = H[1, 0] = model.direct_coupling
    return SingleExcitationModel(H=H, qubits=tuple(model.qubits), mode_omega=b.omega.copy())


def _sector_state(init, nq, dim):
    psi = np.zeros(dim, dtype=complex)
    if isinstance(init, str):
        if init in ("excited", "A"):
            psi[0] = 1.0
        elif init == "B" and nq == 2:
            psi[1] = 1.0
        elif init in ("symmetric", "bell-plus") and nq == 2:
            psi[:2] = 1.0 / np.sqrt(2.0)
        elif init in ("antisymmetric", "bell-minus") and nq == 2:
            psi[0], psi[1] = 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)
        else:
            raise ValueError(f"unknown sector state {init!r} for {nq} qubit(s)")
    else:
        amp = np.asarray(init, dtype=complex).ravel()
        if amp.size != nq:
            raise ValueError(f"need {nq} qubit amplitudes")
        psi[:nq] = amp / np.linalg.norm(amp)
    return psi


@dataclass
class SectorEvolution:
    times: np.ndarray
    survival: np.ndarray  # |<psi0|psi(t)>|^2
    excitation: np.ndarray  # total qubit excitation probability
    norm_dev: np.ndarray


def evolve_sector(sem: SingleExcitationModel, t_grid, init="excited") -> SectorEvolution:
    t = np.asarray(t_grid, dtype=float)
    nq = sem.n_qubits
    # shift by the first qubit energy to keep the phases small
    ref = sem.H[0, 0]
    E, V = np.linalg.eigh((sem.H - ref * np.eye(sem.dim)) / HBAR)
    psi0 = _sector_state(init, nq, sem.dim)
    c = V.conj().T @ psi0
    survival = np.empty(t.size)
    excitation = np.empty(t.size)
    norm_dev = np.empty(t.size)
    proj = psi0.conj() @ V
    for s in range(0, t.size, 256):
        ph = np.exp(-1j * np.outer(t[s:s + 256], E)) * c[None, :]
        psi = ph @ V.T  # rows are psi(t)
        survival[s:s + 256] = np.abs(ph @ proj) ** 2
        excitation[s:s + 256] = np.sum(np.abs(psi[:, :nq]) ** 2, axis=1)
        norm_dev[s:s + 256] = np.abs(np.sum(np.abs(psi) ** 2, axis=1) - 1.0)
    return SectorEvolution(times=t, survival=survival, excitation=excitation, norm_dev=norm_dev)


def wigner_weisskopf(model: SystemBathModel, N=None, t_grid=None, init="excited"):
    """Survival probability of ``init`` in the single-excitation sector.

    ``N`` (optional) only checks the bath size; the modes come from the model.
    """
    if t_grid is None:
        raise ValueError("t_grid is required")
    bath = model.baths[_only_bath(model)]
    if N is not None and N != bath.N:
        raise ValueError(f"model bath has {bath.N} modes, N = {N} requested")
    if bath.N > MAX_SECTOR_MODES:
        raise DimensionTooLarge(f"{bath.N} modes exceeds the sector limit {MAX_SECTOR_MODES}")
    return evolve_sector(sector_hamiltonian(model), t_grid, init).survival


# ---------------------------------------------------------------------------
# small dense oracle


def thermal_fock(omega, thermal: ThermalParams, cutoff):
    """Truncated, renormalized Bose populations and the discarded tail mass."""
    n = np.arange(cutoff + 1)
    if thermal.T == 0:
        return np.eye(cutoff + 1)[0], 0.0
    x = float(thermal.x(omega))
    tail = float(np.exp(-(cutoff + 1) * x))
    p = np.exp(-n * x) * (-np.expm1(-x))
    return p / p.sum(), tail


def _ladder(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1).astype(complex)


@dataclass
class DenseOracleResult:
    times: np.ndarray
    states: np.ndarray  # reduced qubit density matrices, (n_t, d, d)
    tail_mass: np.ndarray  # per mode
    dim: int

    @property
    def populations(self):
        return np.real(np.einsum("tii->ti", self.states))


def dense_bath_oracle(model: SystemBathModel, N, fock_cutoff, thermal: ThermalParams | None,
                      t_grid, rho_qubit=None, modes=None, rwa=False) -> DenseOracleResult:
    """Exact evolution of qubits x ``N`` truncated modes, traced over the bath.

    ``modes`` selects which bath modes to keep (default: the ``N`` closest to
    the first qubit frequency).  ``rwa=True`` drops the counter-rotating terms.
    """
    if N > MAX_DENSE_MODES or fock_cutoff > MAX_FOCK_CUTOFF or N < 1 or fock_cutoff < 1:
        raise DimensionTooLarge(f"need 1 <= N <= {MAX_DENSE_MODES}, 1 <= cutoff <= {MAX_FOCK_CUTOFF}")
    nq = len(model.qubits)
    dq, db = 2**nq, (fock_cutoff + 1) ** N
    if dq * db > MAX_DENSE_DIM:
        raise DimensionTooLarge(f"Hilbert dimension {dq * db} exceeds {MAX_DENSE_DIM}")
    bath_name = _only_bath(model)
    b = model.baths[bath_name]
    thermal = model.thermal[bath_name] if thermal is None else thermal
    if modes is None:
        modes = np.sort(np.argsort(np.abs(b.omega - model.omega[0]), kind="stable")[:N])
    modes = np.asarray(modes)
    if modes.size != N:
        raise ValueError("len(modes) must equal N")
    w = b.omega[modes]
    g = {q: (np.asarray(model.couplings(q, bath_name), dtype=float) * np.ones(b.N))[modes]
         for q in model.qubits}

    # bath thermal state, truncated per mode
    p_bath = np.array([1.0])
    tails = np.empty(N)
    for k in range(N):
        pk, tails[k] = thermal_fock(w[k], thermal, fock_cutoff)
        if tails[k] > TAIL_LIMIT:
            raise CutoffTooLow(f"mode {k}: thermal tail {tails[k]:.3g} above {TAIL_LIMIT} at cutoff {fock_cutoff}")
        p_bath = np.kron(p_bath, pk)

    a = _ladder(fock_cutoff)
    eye_f = np.eye(fock_cutoff + 1)
    ops = []
    for k in range(N):
        op = np.array([[1.0 + 0j]])
        for m in range(N):
            op = np.kron(op, a if m == k else eye_f)
        ops.append(op)
    Iq, Ib = np.eye(dq), np.eye(db)
    H = np.zeros((dq * db, dq * db), dtype=complex)
    for j in range(nq):
        H += HBAR * model.omega[j] * np.kron(embed(SIGMA_PLUS @ SIGMA_MINUS, j, nq), Ib)
    if nq == 2 and model.direct_coupling:
        H += model.direct_coupling * np.kron(np.kron(SIGMA_Y, SIGMA_Y), Ib)
    for k in range(N):
        ak = ops[k]
        H += HBAR * w[k] * np.kron(Iq, ak.conj().T @ ak)
        for j, q in enumerate(model.qubits):
            sp, sm = embed(SIGMA_PLUS, j, nq), embed(SIGMA_MINUS, j, nq)
            if rwa:
                H += -g[q][k] * (np.kron(sp, ak) + np.kron(sm, ak.conj().T))
            else:
                H += 1j * g[q][k] * np.kron(embed(SIGMA_Y, j, nq), ak.conj().T - ak)

    if rho_qubit is None:
        v = ket("e" * nq)
        rho_qubit = np.outer(v, v.conj())
    rho0 = np.kron(np.asarray(rho_qubit, dtype=complex), np.diag(p_bath).astype(complex))
    E, V = np.linalg.eigh(H / HBAR)
    E = E - E[0]
    # evolve a square-root factor of rho0 instead of the full density matrix
    p0, U0 = np.linalg.eigh(rho0)
    keep = p0 > 1e-15 * p0.max()
    W = V.conj().T @ (U0[:, keep] * np.sqrt(p0[keep]))
    t = np.asarray(t_grid, dtype=float)
    states = np.empty((t.size, dq, dq), dtype=complex)
    for i, ti in enumerate(t):
        psi = (V @ (np.exp(-1j * E * ti)[:, None] * W)).reshape(dq, db, -1)
        states[i] = np.einsum("ajk,bjk->ab", psi, psi.conj())
    return DenseOracleResult(times=t, states=states, tail_mass=tails, dim=dq * db)


# ---------------------------------------------------------------------------
# rate fits and bath correlations


@dataclass(frozen=True)
class RateFit:
    rate: float
    residual: float  # RMS of the ln p residual
    n_points: int


def extract_rate(t, p, window=None) -> RateFit:
    """Least-squares slope of ln p(t) over ``window = (t0, t1)``."""
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    if window is None:
        window = (t[0], t[-1])
    t0, t1 = window
    eps = 1e-9 * (t[-1] - t[0])  # absorbs rounding in the window edges
    if t0 < t[0] - eps or t1 > t[-1] + eps or t1 <= t0:
        raise ValueError("fit window must lie inside the time grid")
    sel = (t >= t0 - eps) & (t <= t1 + eps)
    if sel.sum() < 2:
        raise ValueError("fit window holds fewer than two samples")
    ps = p[sel]
    if np.any(~(ps > 0)):
        raise NonPositiveSample("ln p needs p > 0 on the fit window")
    y = np.log(ps)
    A = np.vstack([t[sel], np.ones(sel.sum())]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return RateFit(rate=float(-coef[0]), residual=float(np.sqrt(np.mean(res**2))), n_points=int(sel.sum()))


def bath_correlation(bath: _foster.FosterBath, thermal: ThermalParams, t):
    """C_VV(t) = sum_j hbar w_j/(2 C_j) [(n_j + 1) e^{-i w_j t} + n_j e^{i w_j t}] in V^2."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    amp = HBAR * bath.omega / (2.0 * bath.C)
    n = bose_einstein(bath.omega, thermal)
    out = np.empty(t_arr.size, dtype=complex)
    step = max(1, 2_000_000 // bath.N)
    for s in range(0, t_arr.size, step):
        ph = np.exp(-1j * np.outer(t_arr[s:s + step], bath.omega))
        out[s:s + step] = ph @ (amp * (n + 1)) + ph.conj() @ (amp * n)
    return out if np.ndim(t) else complex(out[0])


def windowed_spectrum(bath: _foster.FosterBath, thermal: ThermalParams, omega, tau=None, n_sigma=6.0):
    """Gaussian-windowed Fourier transform int C_VV(t) e^{i w t} e^{-t^2/2tau^2} dt.

    The default ``tau = 1/d_omega`` stays well below the recurrence time while
    smoothing each mode line over about one mode spacing.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    tau = 1.0 / bath.d_omega if tau is None else tau
    wmax = float(bath.omega.max()) + float(np.abs(omega).max())
    dt = np.pi / (2.0 * wmax)
    n = int(np.ceil(n_sigma * tau / dt))
    t = np.arange(1, n + 1) * dt
    c = bath_correlation(bath, thermal, t)
    win = np.exp(-0.5 * (t / tau) ** 2)
    c0 = bath_correlation(bath, thermal, 0.0).real
    # C(-t) = C(t)*, so the integral over t < 0 is the conjugate of t > 0
    s = np.empty(omega.size)
    for i, w in enumerate(omega):
        s[i] = dt * (c0 + 2.0 * np.real(np.sum(c * win * np.exp(1j * w * t))))
    return s if np.ndim(omega) and s.size > 1 else float(s[0])


# ---------------------------------------------------------------------------
# Lindblad comparison harness


def lindblad_rate(model: SystemBathModel, qubit=None):
    gen = build_generator(model)
    qubit = model.qubits[0] if qubit is None else qubit
    return float(sum(v[0] for (q, _), v in gen.rates.items() if q == qubit))


def resonant_band(spec: CircuitSpec, N: int, resolution=DEFAULT_RESOLUTION, rate=None):
    """Foster bands of N modes centred on the mean qubit frequency.

    Mode spacing is ``resolution * rate`` (rate defaults to the largest T = 0
    Lindblad decay rate of the circuit), so the band width grows with N.
    """
    if rate is None:
        model = weak_coupling_model(spec)
        gen = build_generator(model)
        rate = max(v[0] for v in gen.rates.values())
    if not rate > 0:
        raise ValueError("decay rate must be positive to size the band")
    dw = resolution * rate
    centre = float(np.mean([q.omega for q in spec.qubits]))
    j_start = int(round(centre / dw)) - N // 2
    if j_start < 1:
        raise ValueError("band would reach DC; lower N or the resolution")
    return {r.name: _foster.ohmic_bath(r.R, r.omega_c, dw, N, j_start=j_start) for r in spec.resistors}


def fit_window(rate, recurrence_time, window=(0.1, 1.0)):
    """Default [0.1/G, 1/G] window, clipped below half the recurrence time."""
    t0, t1 = window[0] / rate, window[1] / rate
    t1 = min(t1, 0.5 * recurrence_time * (1 - 1e-9))
    if t1 <= t0:
        raise ValueError("recurrence time too short for the fit window")
    return t0, t1


@dataclass
class OracleComparison:
    gamma_lindblad: float
    gamma_fitted: float
    relative_error: float
    recurrence_time: float
    fit_residual: float
    modes: int
    d_omega: float
    window: tuple[float, float]
    max_norm_dev: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def oracle_compare(spec: CircuitSpec, N: int, resolution=DEFAULT_RESOLUTION, samples=200,
                   init="excited", expected_factor=1.0) -> OracleComparison:
    """Fit the sector survival probability and compare with the Lindblad rate.

    ``expected_factor`` scales the single-qubit Lindblad rate for collective
    initial states (2 for the symmetric state of a balanced common bath).
    """
    base = weak_coupling_model(spec)
    if any(th.T != 0 for th in base.thermal.values()):
        raise UnsupportedRegime("oracle comparison needs T = 0 baths")
    gamma = lindblad_rate(base)
    baths = resonant_band(spec, N, resolution, rate=gamma)
    model = weak_coupling_model(spec, baths=baths)
    b = next(iter(baths.values()))
    t_rec = 2.0 * np.pi / b.d_omega
    target = expected_factor * gamma
    t0, t1 = fit_window(gamma, t_rec)
    t = np.linspace(0.0, t1, samples + 1)
    ev = evolve_sector(sector_hamiltonian(model), t, init)
    fit = extract_rate(t, ev.survival, (t0, t1))
    return OracleComparison(
        gamma_lindblad=target,
        gamma_fitted=fit.rate,
        relative_error=abs(fit.rate - target) / target,
        recurrence_time=t_rec,
        fit_residual=fit.residual,
        modes=N,
        d_omega=b.d_omega,
        window=(t0, t1),
        max_norm_dev=float(ev.norm_dev.max()),
    )
