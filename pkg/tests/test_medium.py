import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satsense import (Medium, NegativePhotonNumber, ProbeState, complex_response,
                      input_quadrature_stats, mean_photon_number, output_quadrature_stats,
                      power_broadened_linewidth)
from satsense.errors import InvalidMedium

from .conftest import random_cases

media = st.builds(Medium, T=st.floats(1e-2, 1e2), n_sat=st.floats(1e-2, 1e2))
states = st.builds(ProbeState, R=st.floats(0, 10), theta=st.floats(-math.pi, math.pi),
                   r=st.floats(0, 2), psi=st.floats(-math.pi, math.pi))
detunings = st.floats(-20, 20)


@pytest.mark.parametrize("n_sat, nbar, expected", [
    (1.0, 0.0, 1.0),
    (1.0, 3.0, 2.0),
    (100.0, 0.01, math.sqrt(1.0001)),
])
def test_power_broadened_linewidth(n_sat, nbar, expected):
    assert power_broadened_linewidth(Medium(1.0, n_sat), nbar) == pytest.approx(expected, rel=1e-15)


def test_negative_photon_number_rejected():
    with pytest.raises(NegativePhotonNumber):
        power_broadened_linewidth(Medium(1.0, 1.0), -1e-3)
    with pytest.raises(NegativePhotonNumber):
        complex_response(Medium(1.0, 1.0), 0.0, -1.0)


@pytest.mark.parametrize("T, n_sat", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.inf, 1.0), (1.0, math.nan)])
def test_invalid_medium(T, n_sat):
    with pytest.raises(InvalidMedium):
        Medium(T, n_sat)


@pytest.mark.parametrize("T, delta, nbar, n_sat, phi, xi, gbar", [
    (2.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0),
    (1.0, 1.0, 0.0, 1.0, 0.25, 0.25, 1.0),
    (2.0, 0.0, 3.0, 1.0, 0.0, 0.25, 2.0),
])
def test_complex_response(T, delta, nbar, n_sat, phi, xi, gbar):
    resp = complex_response(Medium(T, n_sat), delta, nbar)
    assert resp.phi == pytest.approx(phi, abs=1e-15)
    assert resp.xi == pytest.approx(xi, rel=1e-15)
    assert resp.gamma_bar == pytest.approx(gbar, rel=1e-15)


@pytest.mark.parametrize("delta", [-3.0, 0.0, 0.5, 7.0])
def test_vacuum_is_fixed_point(delta):
    out = output_quadrature_stats(ProbeState(), Medium(3.0, 0.2), delta)
    assert (out.mu, out.v) == (0.0, 1.0)


def test_coherent_output():
    state, medium, delta = ProbeState(R=1.7, theta=0.4), Medium(0.8, 2.0), 0.9
    out = output_quadrature_stats(state, medium, delta)
    resp = complex_response(medium, delta, mean_photon_number(state))
    assert out.v == 1.0
    assert out.mu == pytest.approx(2 * 1.7 * math.cos(resp.phi - 0.4) * math.exp(-resp.xi), rel=1e-15)


def test_squeezed_vacuum_through_unsaturated_resonance():
    state, medium = ProbeState(r=1.0), Medium(2.0, 1e9)
    # independent single-expression evaluation of the composed loss channel
    nbar = math.sinh(1.0) ** 2
    xi = 1.0 / (1.0 + nbar / 1e9)
    expected = math.exp(-2.0) * math.exp(-2 * xi) + (1 - math.exp(-2 * xi))
    out = output_quadrature_stats(state, medium, 0.0)
    assert out.v == pytest.approx(expected, rel=1e-14)
    assert out.v == pytest.approx(0.8829803, abs=1e-7)
    assert out.mu == 0.0


def test_output_matches_jitted_kernel():
    from satsense import _kernels as K
    for state, medium, delta in random_cases(50, seed=3):
        out = output_quadrature_stats(state, medium, delta)
        mu, v = K.output_stats(state.R, state.theta, state.r, state.psi, medium.T, medium.n_sat, delta)
        assert mu == pytest.approx(out.mu, rel=1e-12, abs=1e-12)
        assert v == pytest.approx(out.v, rel=1e-12)


@given(states, media, detunings)
def test_beam_splitter_consistency(state, medium, delta):
    resp = complex_response(medium, delta, mean_photon_number(state))
    v_in = input_quadrature_stats(state, resp.phi).v
    v_out = output_quadrature_stats(state, medium, delta).v
    assert v_out - 1 == pytest.approx((v_in - 1) * math.exp(-2 * resp.xi), rel=1e-12, abs=1e-12)
    assert min(v_in, 1.0) - 1e-12 <= v_out <= max(v_in, 1.0) + 1e-12


@given(media, detunings, st.floats(0, 1e4), st.floats(0, 1e4))
def test_saturation_monotonicity(medium, delta, n1, n2):
    lo, hi = sorted((n1, n2))
    a = complex_response(medium, delta, lo)
    b = complex_response(medium, delta, hi)
    assert b.xi <= a.xi
    assert abs(b.phi) <= abs(a.phi)
    assert b.gamma_bar >= a.gamma_bar >= 1.0
    assert 0.0 < math.exp(-2 * a.xi) <= 1.0


@given(states, media, detunings)
def test_reflection_parity(state, medium, delta):
    mirrored = ProbeState(state.R, -state.theta, state.r, -state.psi)
    nbar = mean_photon_number(state)
    a = complex_response(medium, delta, nbar)
    b = complex_response(medium, -delta, nbar)
    assert b.phi == -a.phi
    assert (b.xi, b.gamma_bar) == (a.xi, a.gamma_bar)
    assert math.copysign(1.0, a.phi) == math.copysign(1.0, delta) or a.phi == 0.0
    oa = output_quadrature_stats(state, medium, delta)
    ob = output_quadrature_stats(mirrored, medium, -delta)
    assert ob.mu == pytest.approx(oa.mu, rel=1e-12, abs=1e-12)
    assert ob.v == pytest.approx(oa.v, rel=1e-12)


@settings(max_examples=50)
@given(states, st.floats(1e-2, 1e2))
def test_transparent_limit(state, n_sat):
    out = output_quadrature_stats(state, Medium(1e-14, n_sat), 0.3)
    inp = input_quadrature_stats(state, 0.0)
    assert out.mu == pytest.approx(inp.mu, rel=1e-9, abs=1e-9)
    assert out.v == pytest.approx(inp.v, rel=1e-9)


def test_resonant_absorption_is_saturable_lorentzian():
    medium = Medium(2.0, 5.0)
    for nbar in np.linspace(0, 50, 11):
        assert complex_response(medium, 0.0, nbar).xi == pytest.approx(1.0 / (1 + nbar / 5.0), rel=1e-15)
