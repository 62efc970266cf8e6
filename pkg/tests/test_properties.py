from __future__ import annotations

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from xyquench import dynamics, model, oracle, output
from xyquench.errors import GaplessPointError
from xyquench.model import ChainSpec, PhaseConvention, QuenchSchedule

SETTINGS = settings(max_examples=300, derandomize=True, database=None, deadline=None)

odd_n = st.integers(1, 300).map(lambda j: 2 * j + 1)
finite = st.floats(-1e6, 1e6, allow_nan=False)


@SETTINGS
@given(finite)
def test_wrap_phase_range(x):
    w = model.wrap_phase(x)
    assert 0.0 <= w < 2 * math.pi
    assert model.circular_distance(w, x) < 1e-9 * max(1.0, abs(x))


@SETTINGS
@given(odd_n, st.floats(-20, 20), st.floats(0.0, 1.0))
def test_total_mod_agrees_with_raw(N, B, a):
    try:
        rep = model.total_phase(ChainSpec(N, a), B)
    except GaplessPointError:
        assume(False)
    assert model.circular_distance(rep.total_mod, rep.total_raw) < 1e-9 * max(1.0, rep.total_raw)
    assert math.isclose(rep.total_raw, math.fsum(2 * g for _, g in rep.per_mode), rel_tol=1e-14)


@SETTINGS
@given(odd_n)
def test_ising_defect_formula_matches_derived_closed_form(N):
    for D in {0, 1, (N - 1) // 4, (N - 1) // 2}:
        rec = dynamics.audit_closed_forms(N, D)
        assert abs(rec.brute_force - rec.derived_closed_form) <= 1e-9 * max(1.0, N)


@SETTINGS
@given(odd_n, st.floats(0.5, 1e4), st.floats(1.01, 10.0))
def test_kink_count_decreases_with_tau(N, tau, factor):
    spec = ChainSpec(N, 1.0)
    slow = dynamics.kink_count(spec, QuenchSchedule(tau * factor)).kink_count
    fast = dynamics.kink_count(spec, QuenchSchedule(tau)).kink_count
    assert slow <= fast
    assert 0.0 <= fast <= spec.M


@SETTINGS
@given(
    st.lists(st.floats(1.0, 1e4), min_size=3, max_size=12, unique=True),
    st.floats(-2.0, 0.0),
    st.floats(1e-3, 10.0),
)
def test_power_law_fit_recovers_exponent(taus, exponent, scale):
    assume(max(taus) / min(taus) > 1.5)
    dens = [scale * t**exponent for t in taus]
    fit = dynamics.fit_power_law(taus, dens)
    assert abs(fit.exponent - exponent) < 1e-9
    rev = dynamics.fit_power_law(taus[::-1], dens[::-1])
    assert rev.exponent == fit.exponent


@SETTINGS
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(output.fmt(x)) == x


@settings(max_examples=60, derandomize=True, database=None, deadline=None)
@given(st.floats(0.0, math.pi), st.integers(0, 2**32 - 1))
def test_ground_state_phase_gauge_free(phi, seed):
    # loop phase does not depend on the random phases eigh attaches to vectors
    H = oracle.build_hamiltonian(3, 0.7, 1.8, phi)
    gs = oracle.ground_state(H)
    rng = np.random.default_rng(seed)
    v = gs.vector * np.exp(1j * rng.uniform(0, 2 * math.pi))
    assert abs(np.vdot(v, H.matrix @ v).real - gs.energy) < 1e-10
    resid = np.linalg.norm(H.matrix @ gs.vector - gs.energy * gs.vector)
    assert resid <= 1e-10
    assert abs(np.linalg.norm(gs.vector) - 1.0) <= 1e-12


@SETTINGS
@given(st.floats(1e-3, math.pi - 1e-3), st.floats(-5, 5), st.floats(0.0, 1.0))
def test_mod_convention_is_wrapped_raw(k, B, a):
    try:
        raw = model.mode_phase(k, B, a)
    except GaplessPointError:
        assume(False)
    assert model.mode_phase(k, B, a, PhaseConvention.MOD_2PI) == model.wrap_phase(raw)
