import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qndlattice import fit_algebraic, fit_exponential, spectrum_match
from qndlattice.analysis import decades, spectrum_extremum, tail_offset
from qndlattice.design import DesignResult

DR = np.arange(0, 101, dtype=float)


def test_exponential_with_offset():
    c = -0.03 * np.exp(-DR / 5.0) - 0.012
    res = fit_exponential(c, (1, 30))
    assert res.ok
    assert res.parameter == pytest.approx(5.0, rel=1e-6)
    assert res.offset == pytest.approx(-0.012, abs=1e-9)
    assert res.amplitude == pytest.approx(-0.03, rel=1e-5)
    assert res.r_squared > 0.999999
    assert decades(c, res) == pytest.approx(29 / 5 / math.log(10), rel=1e-4)


def test_algebraic_synthetic():
    dr = np.arange(1, 101, dtype=float)
    c = -0.05 * dr**-0.7
    res = fit_algebraic(c, (2, 33), delta_r=dr)
    assert res.parameter == pytest.approx(0.7, abs=1e-4)
    assert res.r_squared > 0.9999
    res = fit_algebraic(c, (2, 33), offset=0.0, delta_r=dr)
    assert res.offset_method == "given"
    assert res.parameter == pytest.approx(0.7, abs=1e-12)


def test_tail_offset_option():
    c = -0.03 * np.exp(-DR / 5.0) + 0.2
    assert tail_offset(c) == pytest.approx(0.2, abs=1e-9)
    res = fit_exponential(c, (1, 15), offset="tail")
    assert res.offset_method == "tail"
    assert res.parameter == pytest.approx(5.0, rel=1e-5)


def test_constant_input_flags_no_decay():
    res = fit_exponential(np.full(50, 0.3), (1, 20))
    assert "no_decay" in res.flags
    assert math.isnan(res.parameter)
    assert not res.ok


def test_growing_input_flags_no_decay():
    res = fit_exponential(np.exp(DR / 10), (1, 20), offset=0.0)
    assert "no_decay" in res.flags


def test_sign_change_flagged():
    c = np.cos(DR)
    res = fit_exponential(c, (1, 20), offset=0.0)
    assert "nonpositive_residual" in res.flags


def test_fit_range_checks():
    with pytest.raises(ValueError):
        fit_exponential(np.ones(10), (1, 3))
    with pytest.raises(ValueError):
        fit_algebraic(np.ones(10), (0, 8))
    with pytest.raises(ValueError):
        fit_exponential(np.ones(10), (1, 8), offset="median")
    with pytest.raises(ValueError):
        fit_exponential(np.ones(10), (1, 8), delta_r=np.arange(5))


@settings(max_examples=30, deadline=None)
@given(xi=st.floats(1.5, 12.0), amp=st.floats(0.005, 1.0), off=st.floats(-0.1, 0.1))
def test_exponential_recovery(xi, amp, off):
    c = -amp * np.exp(-DR / xi) + off
    res = fit_exponential(c, (1, 15))
    assert res.parameter == pytest.approx(xi, rel=1e-4)


@settings(max_examples=30, deadline=None)
@given(zeta=st.floats(0.2, 2.0), off=st.floats(-0.05, 0.05))
def test_algebraic_recovery(zeta, off):
    dr = np.arange(1, 101, dtype=float)
    c = -0.04 * dr**-zeta + off
    res = fit_algebraic(c, (2, 33), delta_r=dr)
    assert res.parameter == pytest.approx(zeta, abs=1e-3)


def _design_from_fractions(f):
    return DesignResult(np.asarray(f), np.asarray(f), np.asarray(f), 0.0, 1.0)


def test_spectrum_match_and_extremum():
    n = 40
    f = np.linspace(0.6, 0.0, n // 2 + 1)
    design = _design_from_fractions(f)
    profile = design.target_profile
    spec = np.concatenate([profile, profile[1:-1][::-1]]) * 7.0
    assert spectrum_match(spec, design, n) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError, match="zero variance"):
        spectrum_match(np.ones(n), design, n)
    m, k = spectrum_extremum(spec, n)
    assert m == 1 and k == pytest.approx(2 * np.pi / n)
    dip = np.ones(n)
    dip[[13, n - 13]] = 0.5
    dip[0] = 0.1  # k = 0 is ignored
    assert spectrum_extremum(dip, n) == (13, pytest.approx(2 * np.pi * 13 / n))
