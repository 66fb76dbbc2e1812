import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipq import foster
from dissipq.errors import GridTooCoarse, NonPositiveRealPart

R = 50.0
WC = 2 * math.pi * 100e9


def test_ohmic_impedance_points():
    assert foster.ohmic_impedance(R, WC, 0.0) == complex(R, 0.0)
    z = foster.ohmic_impedance(R, WC, WC)
    assert z.real == pytest.approx(R / 2, rel=1e-15)
    assert z.imag == pytest.approx(R / 2, rel=1e-15)


def test_ohmic_impedance_conjugate_symmetry():
    w = np.linspace(-5 * WC, 5 * WC, 101)
    np.testing.assert_array_equal(foster.ohmic_impedance(R, WC, -w), np.conj(foster.ohmic_impedance(R, WC, w)))


def test_flat_real_part():
    dw = 1e8
    bath = foster.synthesize(lambda w: np.full_like(w, R), dw, 50)
    np.testing.assert_allclose(bath.C, math.pi / (2 * dw * R), rtol=1e-15)
    np.testing.assert_array_equal(bath.j, np.arange(1, 51))
    np.testing.assert_array_equal(bath.omega, np.arange(1, 51) * dw)


def test_ohmic_capacitance_growth():
    dw = WC / 100
    bath = foster.ohmic_bath(R, WC, dw, 300)
    flat = math.pi / (2 * dw * R)
    np.testing.assert_allclose(bath.C / flat, (WC**2 + bath.omega**2) / WC**2, rtol=1e-14)


def test_single_mode_inductance():
    dw = 3e9
    bath = foster.ohmic_bath(R, WC, dw, 1)
    rez = foster.ohmic_re(R, WC)(dw)
    assert bath.N == 1
    assert bath.L[0] == pytest.approx(2 * dw * rez / (math.pi * dw**2), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(1e9, 1e13), st.floats(1e6, 1e10), st.integers(1, 400))
def test_lc_resonance_identity(Rv, wc, dw, N):
    bath = foster.ohmic_bath(Rv, wc, dw, N)
    prod = bath.C * bath.L * bath.omega**2
    assert np.all(np.abs(prod - 1.0) <= 2.3e-16)
    assert np.all(np.isfinite(bath.C) & (bath.C > 0) & np.isfinite(bath.L) & (bath.L > 0))


def test_nonpositive_real_part():
    with pytest.raises(NonPositiveRealPart):
        foster.synthesize(lambda w: R - w / 1e8, 1e9, 20)
    with pytest.raises(ValueError):
        foster.synthesize(foster.ohmic_re(R, WC), 0.0, 10)


def test_band_start():
    bath = foster.ohmic_bath(R, WC, 1e6, 10, j_start=1000)
    assert bath.omega[0] == 1000 * 1e6
    with pytest.raises(ValueError):
        foster.ohmic_bath(R, WC, 1e6, 10, j_start=0)


def test_default_grid():
    dw, N = foster.default_grid(2 * math.pi * 5e9)
    assert N == 2000
    assert N * dw == pytest.approx(20 * 2 * math.pi * 5e9)


def test_recompose_accuracy_default_guidance():
    # d_omega = w_c/1e4, eta = 10 d_omega, w = w_c/2: better than 1 %
    dw = WC / 1e4
    bath = foster.ohmic_bath(R, WC, dw, int(20 * WC / dw))
    w = WC / 2
    z = foster.recompose(bath, w, eta=10 * dw)
    assert abs(z.real / foster.ohmic_re(R, WC)(w) - 1) < 0.01


def test_recompose_conjugate_symmetry():
    bath = foster.ohmic_bath(R, WC, WC / 100, 2000)
    w = np.linspace(0.1, 3, 17) * WC
    eta = WC / 10
    np.testing.assert_allclose(foster.recompose(bath, -w, eta), np.conj(foster.recompose(bath, w, eta)), rtol=1e-12)


def test_recompose_dc_real_part_vanishes_as_eta_shrinks():
    # Re Z_inf(0) = sum eta/(C_j (w_j^2 + eta^2)) -> R pi eta/(3 d_omega) for eta << d_omega
    dw = WC / 100
    bath = foster.ohmic_bath(R, WC, dw, 2000)
    vals = [foster.recompose(bath, 0.0, eta).real / R for eta in (1e-2 * dw, 1e-4 * dw)]
    assert vals[0] == pytest.approx(math.pi / 300, rel=0.02)  # Ohmic roll-off lowers it slightly
    assert vals[1] == pytest.approx(vals[0] / 100, rel=1e-3)  # linear in eta


def test_recompose_rejects_bad_eta():
    bath = foster.ohmic_bath(R, WC, WC / 100, 10)
    with pytest.raises(ValueError):
        foster.recompose(bath, 1.0, 0.0)


def test_kk_constant_impedance_centre():
    grid = np.linspace(-10.0, 10.0, 1001)
    res = foster.kramers_kronig_residual(lambda w: np.full(w.shape, R, dtype=complex), grid)
    # the PV integral of a constant vanishes at the centre of a symmetric window
    assert res[500] < 1e-12 * R


def test_kk_inductor_fails():
    grid = np.linspace(-10.0, 10.0, 1001)
    res = foster.kramers_kronig_residual(lambda w: -1j * w * 1e-9, grid)
    assert res.max() > 1e-9


def test_kk_grid_checks():
    with pytest.raises(GridTooCoarse):
        foster.kramers_kronig_residual(lambda w: w + 0j, np.linspace(-1, 1, 63))
    with pytest.raises(ValueError):
        foster.kramers_kronig_residual(lambda w: w + 0j, np.linspace(-1, 2, 100))
    with pytest.raises(ValueError):
        foster.kramers_kronig_residual(lambda w: w + 0j, np.geomspace(1, 2, 100))


def test_csv_table():
    bath = foster.ohmic_bath(R, WC, 1e9, 3)
    lines = bath.to_csv().splitlines()
    assert lines[0] == "j,omega_j,C_j,L_j"
    assert len(lines) == 4
    j, w, c, l = lines[1].split(",")
    assert int(j) == 1 and float(w) == 1e9
    assert float(c) == bath.C[0]
    assert len(bath.modes()) == 3
