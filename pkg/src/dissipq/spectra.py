"""Noise spectral densities: quantum Johnson-Nyquist, Ohmic J(omega), LC filter,
and zero-frequency Landauer-Buttiker noise.

Sign convention: positive omega is absorption by the bath, negative omega is
emission (Fourier kernel e^{+i omega t}).  Use :func:`to_engineering` to flip.
All densities are SI (V^2 s, A^2 s); T = 0 is exact (beta = inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.constants import e as E_CHARGE
from scipy.constants import hbar as HBAR
from scipy.constants import k as K_B

from .errors import DomainError, TransmissionOutOfRange

FERMI_WINDOW = 40.0  # integration half-width in units of k_B T


@dataclass(frozen=True)
class ThermalParams:
    T: float

    def __post_init__(self):
        if not self.T >= 0 or math.isinf(self.T):
            raise ValueError("temperature must be finite and >= 0")

    @property
    def beta(self) -> float:
        return math.inf if self.T == 0 else 1.0 / (K_B * self.T)

    @classmethod
    def from_beta(cls, beta):
        return cls(0.0 if math.isinf(beta) else 1.0 / (K_B * beta))

    def x(self, omega):
        """beta * hbar * omega (inf at T = 0 for omega > 0)."""
        omega = np.asarray(omega, dtype=float)
        if self.T == 0:
            return np.where(omega > 0, np.inf, np.where(omega < 0, -np.inf, 0.0))
        return HBAR * omega / (K_B * self.T)


def _occupation(a, thermal: ThermalParams):
    """Bose factor at a > 0; overflow of expm1 at large beta hbar w gives n = 0."""
    if thermal.T == 0:
        return np.zeros_like(a)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(thermal.x(a))


def to_engineering(omega):
    """Map a physics-convention frequency to the engineering convention."""
    return -np.asarray(omega)


def bose_einstein(omega, thermal: ThermalParams):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("bose_einstein needs omega > 0; use signed_occupation for signed omega")
    n = _occupation(omega, thermal)
    return n if n.ndim else float(n)


def signed_occupation(omega, thermal: ThermalParams):
    """n(w) + 1 for absorption (w > 0), -n(-w) for emission (w < 0)."""
    omega = np.asarray(omega, dtype=float)
    a = np.abs(omega)
    safe = np.where(a > 0, a, 1.0)
    n = _occupation(safe, thermal)
    out = np.where(omega > 0, n + 1.0, -n)
    out = np.where(omega == 0, np.nan, out)
    return out if out.ndim else float(out)


def voltage_psd(re_z, omega, thermal: ThermalParams):
    """Double-sided S_VV(w) = 2 Re Z(w) hbar w / (1 - exp(-beta hbar w))."""
    omega = np.asarray(omega, dtype=float)
    a = np.abs(omega)
    rz = np.asarray(re_z(a), dtype=float) * np.ones_like(a)
    safe = np.where(a > 0, a, 1.0)
    n = _occupation(safe, thermal)
    s = np.where(omega > 0, 2.0 * HBAR * a * rz * (n + 1.0), 2.0 * HBAR * a * rz * n)
    s = np.where(omega == 0, 2.0 * rz * K_B * thermal.T, s)
    return s if s.ndim else float(s)


def symmetrized_single_sided_psd(re_z, omega, thermal: ThermalParams):
    """S_VV(w) + S_VV(-w) = 2 hbar w Re Z coth(beta hbar w / 2), w > 0.

    Summed branch by branch (2 hbar w Re Z (2n + 1)) so that it equals the sum
    of the two :func:`voltage_psd` values exactly, not just to a few ulp.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("symmetrized single-sided density needs omega > 0")
    rz = np.asarray(re_z(omega), dtype=float) * np.ones_like(omega)
    n = _occupation(omega, thermal)
    s = 2.0 * HBAR * omega * rz * (n + 1.0) + 2.0 * HBAR * omega * rz * n
    return s if s.ndim else float(s)


def per_root_hz(s):
    """Single-sided V^2 s density -> V/sqrt(Hz) amplitude."""
    return np.sqrt(s)


def check_parity(re_z, omega, rtol=1e-14):
    omega = np.asarray(omega, dtype=float)
    return bool(np.allclose(re_z(omega), re_z(-omega), rtol=rtol, atol=0))


# ---------------------------------------------------------------------------
# bath spectral densities


def filter_transfer_sq(R, C_f, L_f, omega):
    """|h_f(w)|^2 of a parallel LC tank fed through series resistor R."""
    omega = np.asarray(omega, dtype=float)
    LC = L_f * C_f
    detune = (1.0 - omega**2 * LC) / LC  # omega_f^2 - omega^2
    h = omega**2 / (omega**2 + (R * C_f * detune) ** 2)
    return h if h.ndim else float(h)


@dataclass(frozen=True)
class OhmicBathDensity:
    """J(w) = gamma w wc^2 / (pi (wc^2 + w^2)), optionally times |h_f(w)|^2."""

    gamma: float
    omega_c: float
    filter: tuple[float, float, float] | None = None  # (R, C_f, L_f)

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        j = self.gamma * omega * self.omega_c**2 / (np.pi * (self.omega_c**2 + omega**2))
        if self.filter is not None:
            j = j * filter_transfer_sq(*self.filter, omega)
        return j if j.ndim else float(j)

    def unfiltered(self):
        return OhmicBathDensity(self.gamma, self.omega_c)


def ohmic_gamma(R, lam, weight):
    """gamma = R lam^2 weight^2 / hbar, weight = C_g/C_Sigma (or (S^-1 a)_j)."""
    return R * lam**2 * weight**2 / HBAR


def ohmic_j(model):
    """Spectral densities of a :class:`~dissipq.hamiltonian.SystemBathModel`.

    Returns ``{(qubit, bath): OhmicBathDensity}`` for every nonzero coupling.
    """
    return dict(model.densities)


# ---------------------------------------------------------------------------
# Landauer-Buttiker


def landauer_conductance(transmissions):
    t = _check_t(transmissions)
    return E_CHARGE**2 / (np.pi * HBAR) * float(np.sum(t))


def _check_t(transmissions):
    t = np.asarray(transmissions, dtype=float).ravel()
    if np.any(~((t >= 0) & (t <= 1))):
        raise TransmissionOutOfRange("transmission eigenvalues must lie in [0, 1]")
    return t


def fermi_noise_integral(T):
    """Numerical int f(1-f) dE over +-40 k_B T around mu (analytic value k_B T)."""
    if T == 0:
        return 0.0
    kT = K_B * T

    def integrand(x):
        # f(1-f) in units of x = (E - mu)/kT
        return 0.25 / np.cosh(0.5 * x) ** 2

    val, _ = integrate.quad(integrand, -FERMI_WINDOW, FERMI_WINDOW, epsabs=0, epsrel=1e-12, limit=200)
    return val * kT


def shot_noise_zero_freq(transmissions, T_L, T_R=None, method="auto"):
    """Zero-frequency current noise S_{I_L I_L}(0) at zero bias (A^2 s).

    ``method="auto"`` uses the closed form 2 k_B T G at equilibrium and the
    numerically integrated Fermi factors otherwise; ``"numeric"`` forces the
    quadrature path.
    """
    t = _check_t(transmissions)
    T_R = T_L if T_R is None else T_R
    if T_L < 0 or T_R < 0:
        raise ValueError("temperatures must be >= 0")
    G = E_CHARGE**2 / (np.pi * HBAR) * float(np.sum(t))
    if method == "auto" and T_L == T_R:
        return 2.0 * K_B * T_L * G
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    return G * (fermi_noise_integral(T_L) + fermi_noise_integral(T_R))
