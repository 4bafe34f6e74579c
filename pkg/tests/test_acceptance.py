"""Acceptance checks 1-8 at full scale (n_s=200, n_a=10, j=1, c_max=0.95).

Each test records a PASS/FAIL line for its criterion; the lines are echoed
in the pytest terminal summary under "acceptance criteria".
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qndlattice import (
    EnsembleConfig,
    Pulse,
    apply_decoherence,
    apply_pulse,
    check_invariants,
    fit_algebraic,
    fit_exponential,
    k_spectrum,
    new_mixed_state,
    witness_scan,
)
from qndlattice.analysis import decades
from qndlattice.cli import monotonicity
from qndlattice.design import solve_coupling
from qndlattice.oracle import compare_states, from_state, oracle_apply_pulse
from qndlattice.pipeline import PRESETS, run_pipeline
from qndlattice.protocol import build_plan, run

DEPTHS = (math.inf, 300.0, 99.0, 33.0)


def test_c1_exponential_target(record_criterion):
    t0 = time.perf_counter()
    res = run_pipeline(PRESETS["paper-a"])
    elapsed = time.perf_counter() - t0
    fit = res.fit
    span = decades(res.report.correlation, fit)
    ok = 4 <= fit.parameter <= 6 and span >= 2 and fit.r_squared > 0.99 and not fit.flags and elapsed < 30
    record_criterion(
        1, ok,
        f"xi={fit.parameter:.4f} on dr {fit.fit_range}, r2={fit.r_squared:.6f}, "
        f"{span:.2f} decades, runtime {elapsed:.2f}s",
    )
    assert 4 <= fit.parameter <= 6
    assert fit.r_squared > 0.99 and not fit.flags
    assert span >= 2
    assert elapsed < 30


def test_c2_algebraic_target(record_criterion, preset_run):
    ideal = preset_run("paper-b").fit
    lossy = preset_run("paper-b", 33.0).fit
    ok = abs(ideal.parameter - 0.4) <= 0.15 and ideal.r_squared > 0.95 and lossy.r_squared > 0.9
    record_criterion(
        2, ok,
        f"zeta={ideal.parameter:.4f} (r2={ideal.r_squared:.5f}) on dr {ideal.fit_range}; "
        f"d=33: zeta={lossy.parameter:.4f}, r2={lossy.r_squared:.5f}",
    )
    assert abs(ideal.parameter - 0.4) <= 0.15
    assert ideal.r_squared > 0.95
    assert lossy.r_squared > 0.9


@pytest.mark.parametrize("preset", ["paper-a", "paper-b"])
def test_c3_optical_depth_ordering(record_criterion, preset_run, preset):
    corr = {d: preset_run(preset, d).report.correlation for d in DEPTHS}
    report = monotonicity(corr, dr_range=(1, 20), tol=1e-6)
    worst = max((v["excess"] for v in report["violations"]), default=0.0)
    record_criterion(3, report["status"] == "pass",
                     f"{preset}: {len(report['violations'])} violations (worst {worst:.2e})")
    assert report["status"] == "pass"


def test_c4_spectrum_match(record_criterion, preset_run):
    a = preset_run("paper-a").summary["spectrum_match"]
    b = preset_run("paper-b").summary["spectrum_match"]
    crit = preset_run("paper-critical")
    m = crit.summary["spectrum_extremum"]["m"]
    k = crit.summary["spectrum_extremum"]["k"]
    spacing = 2 * np.pi / 200
    ok = a >= 0.95 and b >= 0.95 and abs(k - 2 * np.pi / 3) <= spacing
    record_criterion(
        4, ok,
        f"match a={a:.5f}, b={b:.5f}; critical extremum m={m}, k={k:.4f} "
        f"vs 2pi/3={2 * np.pi / 3:.4f} (grid {spacing:.4f})",
    )
    assert a >= 0.95 and b >= 0.95
    assert abs(k - 2 * np.pi / 3) <= spacing


@pytest.mark.parametrize("preset", ["paper-a", "paper-b"])
def test_c5_witness(record_criterion, preset_run, preset):
    res = preset_run(preset)
    scan = res.witness
    w0 = scan.at_phi_zero()
    near = w0[scan.delta_r <= 5]
    at_zero = bool(np.all(np.isclose(scan.argmin_phi, 0.0)))
    wfit = res.witness_fit
    ok = bool(np.all(near < 0)) and at_zero and wfit.r_squared > 0.9 and not wfit.flags
    law = "xi" if wfit.law == "exponential" else "zeta"
    record_criterion(
        5, ok,
        f"{preset}: max W(dr<=5, 0)={near.max():.3e}, argmin phi=0 for all dr: {at_zero}, "
        f"-W fit {law}={wfit.parameter:.3f} r2={wfit.r_squared:.4f}",
    )

    # informational: the single bin at the lattice start with the chain sliding away
    literal = witness_scan(res.state, res.config.ensemble(), m=1, n=106, phi=scan.phi, anchor="single")
    fitter = fit_exponential if wfit.law == "exponential" else fit_algebraic
    lit_fit = fitter(-literal.at_phi_zero(), wfit.fit_range, delta_r=literal.delta_r)
    print(f"  {preset} single-anchored scan: max W(dr<=5, 0)={literal.at_phi_zero()[:5].max():.3e}, "
          f"-W fit r2={lit_fit.r_squared:.4f} flags={lit_fit.flags}")

    assert np.all(near < 0)
    assert at_zero
    assert wfit.r_squared > 0.9 and not wfit.flags


def test_c5_mixed_state_baseline(record_criterion):
    cfg = EnsembleConfig()
    scan = witness_scan(new_mixed_state(cfg), cfg, m=1, n=106)
    err = float(np.max(np.abs(scan.values - 1.0)))
    record_criterion(5, err <= 1e-12, f"mixed-state |W-1| max {err:.1e}")
    assert err <= 1e-12


_worst_oracle = [0.0]


@settings(max_examples=60, deadline=None, derandomize=True)
@given(
    n=st.sampled_from([8, 16]),
    pulses=st.lists(
        st.tuples(st.integers(0, 10**6), st.sampled_from("xyz"), st.floats(0.0, 1.0), st.sampled_from([0.0, 0.01])),
        min_size=20,
        max_size=20,
    ),
)
def _oracle_property(n, pulses):
    cfg = EnsembleConfig(n_s=n)
    state = new_mixed_state(cfg)
    ext = from_state(state)
    for p, comp, c, eta in pulses:
        pulse = Pulse(p % (n // 2 + 1), comp, c, eta)
        apply_pulse(state, cfg, pulse)
        ext = oracle_apply_pulse(ext, cfg, pulse)
    diff = compare_states(state, ext)
    _worst_oracle[0] = max(_worst_oracle[0], diff)
    assert diff <= 1e-10


def test_c6_oracle_equivalence(record_criterion):
    ok = True
    try:
        _oracle_property()
    except AssertionError:
        ok = False
    record_criterion(6, ok, f"max engine-oracle difference {_worst_oracle[0]:.2e} over 60 random 20-pulse runs")
    assert ok


def test_c7_single_pulse_closed_forms(record_criterion):
    cfg = EnsembleConfig()
    g0 = cfg.gamma0
    worst_g22 = worst_spec = 0.0
    for p in range(1, 100):
        for c in (0.1, 0.5, 0.95):
            state = new_mixed_state(cfg)
            diag = apply_pulse(state, cfg, Pulse(p, "z", c))
            worst_g22 = max(worst_g22, abs(diag.gamma22_out - (0.5 + 3 / (8 * cfg.j) * c**2 * g0)))
            spec = k_spectrum(state, "z")
            worst_spec = max(worst_spec, abs(spec[p] - g0 * (1 - diag.achieved_fraction / 4)))
    worst_trip = 0.0
    for p in (1, 7, 33, 50, 67, 99):
        for f in np.linspace(0.01, 0.6, 25):
            c = solve_coupling(f, p, cfg)
            diag = apply_pulse(new_mixed_state(cfg), cfg, Pulse(p, "x", c))
            worst_trip = max(worst_trip, abs(diag.achieved_fraction - f))
    ok = worst_g22 <= 1e-10 and worst_spec <= 1e-10 and worst_trip <= 1e-6
    record_criterion(7, ok, f"G22 err {worst_g22:.1e}, spectrum err {worst_spec:.1e}, "
                            f"round-trip err {worst_trip:.1e}")
    assert worst_g22 <= 1e-10
    assert worst_spec <= 1e-10
    assert worst_trip <= 1e-6


@pytest.mark.parametrize("preset, d", [("paper-a", math.inf), ("paper-b", 33.0)])
def test_c8_invariants_after_every_pulse(record_criterion, preset_run, preset, d):
    cfg = replace(PRESETS[preset], d=d).ensemble()
    design = preset_run(preset, d).design
    worst = {"eig": math.inf, "refl": 0.0, "fixed": 0.0}

    def check(state, diag):
        check_invariants(state)
        for a in range(3):
            worst["eig"] = min(worst["eig"], float(np.linalg.eigvalsh(state.g[a])[0]))
        for comp in ("x", "y", "z", "sum"):
            spec = k_spectrum(state, comp)
            worst["refl"] = max(worst["refl"], float(np.max(np.abs(spec[1:] - spec[1:][::-1]))))

    state, report = run(build_plan(design, cfg), cfg, after_pulse=check)
    apply_decoherence(state, cfg, 0.5)
    worst["fixed"] = float(np.max(np.abs(state.g - new_mixed_state(cfg).g)))
    ok = worst["refl"] <= 1e-10 * cfg.gamma0 and worst["fixed"] <= 1e-12
    record_criterion(
        8, ok,
        f"{preset} d={d:g}: {len(report.trace)} pulses, min eigenvalue {worst['eig']:.2e}, "
        f"reflection err {worst['refl']:.1e}, eta=1/2 fixed point err {worst['fixed']:.1e}",
    )
    assert worst["refl"] <= 1e-10 * cfg.gamma0
    assert worst["fixed"] <= 1e-12
