"""Caldeira-Leggett bath of a resistor as a Foster first-form LC chain.

Mode ``j`` sits at ``omega_j = j * d_omega`` (``j >= 1``; the chain cannot
represent DC) with

    C_j = pi / (2 d_omega Re Z(omega_j)),   L_j = 1 / (C_j omega_j**2).

Defaults (N = 2000, N d_omega = 20 max qubit frequency, eta = 10 d_omega for
recomposition) are an engineering choice, not a derived accuracy rule.  The
recomposed real part converges to first order in eta; with eta = 10 d_omega
the relative error at omega_c/2 is roughly 4 d_omega/omega_c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import GridTooCoarse, NonPositiveRealPart

DEFAULT_MODES = 2000
DEFAULT_SPAN = 20.0
DEFAULT_ETA_RATIO = 10.0


def ohmic_impedance(R, omega_c, omega):
    """Lorentz-Drude (Ohmic) resistor impedance, physics sign convention."""
    omega = np.asarray(omega, dtype=float)
    den = omega_c**2 + omega**2
    z = R * omega_c**2 / den + 1j * R * omega * omega_c / den
    return z if z.ndim else complex(z)


def ohmic_re(R, omega_c):
    """Even real-part evaluator ``omega -> Re Z(omega)`` for :func:`synthesize`."""
    def re_z(omega):
        omega = np.asarray(omega, dtype=float)
        return R * omega_c**2 / (omega_c**2 + omega**2)
    return re_z


@dataclass(frozen=True)
class FosterBath:
    j: np.ndarray
    omega: np.ndarray
    C: np.ndarray
    L: np.ndarray
    d_omega: float
    R: float | None = None
    omega_c: float | None = None

    @property
    def N(self) -> int:
        return int(self.j.size)

    def re_z(self, omega):
        """Re Z of the source impedance at the mode grid, recovered from C_j."""
        return np.pi / (2.0 * self.d_omega * self.C)

    def modes(self):
        return [{"j": int(j), "omega": float(w), "C": float(c), "L": float(l)}
                for j, w, c, l in zip(self.j, self.omega, self.C, self.L)]

    def to_csv(self) -> str:
        rows = ["j,omega_j,C_j,L_j"]
        for j, w, c, l in zip(self.j, self.omega, self.C, self.L):
            rows.append(f"{int(j)},{w:.16e},{c:.16e},{l:.16e}")
        return "\n".join(rows) + "\n"


def synthesize(re_z, d_omega: float, N: int, j_start: int = 1, R=None, omega_c=None) -> FosterBath:
    """Discretize ``re_z`` into ``N`` LC modes starting at ``j_start * d_omega``.

    ``j_start > 1`` keeps only a band of the full chain (used by the
    single-excitation oracle, which needs d_omega below the decay rate).
    """
    if not d_omega > 0:
        raise ValueError("d_omega must be positive")
    if N < 1 or j_start < 1:
        raise ValueError("need N >= 1 and j_start >= 1")
    j = np.arange(j_start, j_start + N, dtype=np.int64)
    omega = j * d_omega
    re = np.asarray(re_z(omega), dtype=float) * np.ones_like(omega)
    bad = ~(re > 0)
    if bad.any():
        k = int(np.argmax(bad))
        raise NonPositiveRealPart(f"Re Z <= 0 at omega = {omega[k]:.6g} rad/s")
    C = np.pi / (2.0 * d_omega * re)
    L = 1.0 / (C * omega**2)
    return FosterBath(j=j, omega=omega, C=C, L=L, d_omega=float(d_omega), R=R, omega_c=omega_c)


def ohmic_bath(R, omega_c, d_omega, N, j_start=1) -> FosterBath:
    return synthesize(ohmic_re(R, omega_c), d_omega, N, j_start=j_start, R=R, omega_c=omega_c)


def default_grid(max_qubit_omega: float, N: int = DEFAULT_MODES, span: float = DEFAULT_SPAN):
    """Return ``(d_omega, N)`` with ``N * d_omega = span * max_qubit_omega``."""
    return span * max_qubit_omega / N, N


def recompose(bath: FosterBath, omega, eta: float):
    """eta-regularized impedance of the finite chain, summed pairwise over modes."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    wj = bath.omega[None, :]
    pref = 1j / (2.0 * bath.C[None, :])
    out = np.empty(w.size, dtype=complex)
    # chunk over omega to bound memory for long chains
    step = max(1, 4_000_000 // max(bath.N, 1))
    for s in range(0, w.size, step):
        ws = w[s:s + step, None]
        terms = pref * (1.0 / (ws - wj + 1j * eta) + 1.0 / (ws + wj + 1j * eta))
        out[s:s + step] = terms.sum(axis=1)  # numpy sums pairwise
    return out if np.ndim(omega) else complex(out[0])


def kramers_kronig_residual(z, grid):
    """Per-point residual |Im Z + (1/pi) PV int Re Z/(w' - w) dw'| on ``grid``.

    ``grid`` must be uniform and symmetric about zero.  The principal value is
    the trapezoid sum with the pole node dropped; on a uniform grid the nodes
    at equal distance above and below the pole pair up, so the odd part of the
    singularity cancels.
    """
    w = np.asarray(grid, dtype=float)
    n = w.size
    if n < 64:
        raise GridTooCoarse(f"need at least 64 grid points, got {n}")
    h = (w[-1] - w[0]) / (n - 1)
    if not np.allclose(np.diff(w), h, rtol=1e-9, atol=0) or not np.isclose(w[0], -w[-1], rtol=1e-12):
        raise ValueError("grid must be uniform and symmetric about 0")
    zw = np.asarray(z(w), dtype=complex)
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2
    v = weights * zw.real
    m = np.arange(-(n - 1), n, dtype=float)
    kern = np.zeros_like(m)
    nz = m != 0
    kern[nz] = 1.0 / (m[nz] * h)
    # PV_i = sum_j v_j / (w_j - w_i) = -(v * kern)[i]
    pv = -fftconvolve(v, kern, mode="full")[n - 1:2 * n - 1]
    return np.abs(zw.imag + pv / np.pi)
