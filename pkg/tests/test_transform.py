import json
import math

import numpy as np
import pytest

from phasekit.basis import GaussianPacket, HermiteGaussian, SampledGrid, Superposition, eval_state, phi
from phasekit.kernel import TailTooHeavy, chi_closed
from phasekit.scales import PhaseIndex, ScaleParam
from phasekit.transform import (
    Spectrum,
    WindowSensitive,
    eval_state_momentum,
    norm_integral,
    norm_sum,
    phase_field,
    phase_wavefunction,
    project,
    project_spectrum,
    reconstruct_integral_XP,
    reconstruct_scale_P,
    reconstruct_scale_X,
    reconstruct_sum,
)

S = ScaleParam(1.0)


def random_state(rng):
    if rng.random() < 0.5:
        return GaussianPacket(rng.uniform(-1, 1), rng.uniform(0.7, 1.4), rng.uniform(-0.5, 0.5))
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    s1 = HermiteGaussian(PhaseIndex(int(rng.integers(0, 4)), rng.uniform(-1, 1), 0.0, ScaleParam(1.0)))
    s2 = GaussianPacket(rng.uniform(-1, 1), 1.0, rng.uniform(-0.5, 0.5))
    raw = Superposition(((c[0], s1), (c[1], s2)), check_norm=False)
    from phasekit.basis import state_norm

    k = 1 / math.sqrt(state_norm(raw))
    return Superposition(((k * c[0], s1), (k * c[1], s2)))


def test_basis_state_projects_to_one():
    idx = PhaseIndex(3, 0.4, -0.2, ScaleParam(0.8))
    assert project(HermiteGaussian(idx), idx) == pytest.approx(1.0, abs=1e-14)


def test_basis_state_projects_to_kernel(rng):
    src = PhaseIndex(2, 0.1, 0.5, ScaleParam(1.3))
    for _ in range(5):
        idx = PhaseIndex(int(rng.integers(0, 6)), rng.uniform(-1, 1), rng.uniform(-1, 1), ScaleParam(0.9))
        assert project(HermiteGaussian(src), idx) == chi_closed(idx, src)


def test_matching_packet_is_orthogonal_to_first_state():
    pk = GaussianPacket(center=0.7, width=1.0, momentum=-0.3)
    assert abs(project(pk, PhaseIndex(1, 0.7, -0.3, S))) < 1e-15


def test_quadrature_method_matches_closed_form(rng):
    pk = GaussianPacket(0.2, 1.4, 0.3)
    for n in range(6):
        idx = PhaseIndex(n, rng.uniform(-1, 1), rng.uniform(-1, 1), S)
        assert abs(project(pk, idx, method="quadrature") - project(pk, idx)) < 1e-12


def test_basis_state_spectrum_is_kronecker():
    idx = PhaseIndex(2, 0.3, 0.3, S)
    sp = project_spectrum(HermiteGaussian(idx), 0.3, 0.3, S, N=6)
    assert np.allclose(sp.amplitudes, [0, 0, 1, 0, 0, 0, 0], atol=1e-14)
    assert norm_sum(sp) == pytest.approx(1.0, abs=1e-14)


def test_orthogonal_single_term_spectrum():
    sp = project_spectrum(HermiteGaussian(PhaseIndex(1, 0.0, 0.0, S)), 0.0, 0.0, S, N=0)
    assert sp.N == 0
    assert norm_sum(sp) == 0.0


def test_displaced_ground_amplitude():
    pk = GaussianPacket(1.0, 1.0, 0.0)
    sp = project_spectrum(pk, 0.0, 0.0, S, N=5)
    assert abs(sp.amplitudes[0]) ** 2 == pytest.approx(math.exp(-0.25), rel=1e-14)


def test_displaced_packet_spectrum_complete_at_30():
    sp = project_spectrum(GaussianPacket(1.0, 1.0, 0.0), 0.0, 0.0, S, N=30)
    assert abs(norm_sum(sp) - 1) < 1e-10


def test_parseval_random_states(rng):
    for _ in range(10):
        s = random_state(rng)
        base = ScaleParam(rng.uniform(0.8, 1.25))
        sp = project_spectrum(s, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), base, N=40)
        tail = 1 - norm_sum(sp)
        assert -1e-13 <= tail <= 1e-8
        assert sp.tail_bound == pytest.approx(tail, abs=1e-15)


@pytest.mark.parametrize("n", [0, 1, 3])
def test_density_normalization(n):
    assert norm_integral(GaussianPacket(0.0, 1.0, 0.0), n, S) == pytest.approx(1.0, abs=1e-4)
    assert norm_integral(GaussianPacket(0.4, 0.7, -0.5), n, ScaleParam(1.2)) == pytest.approx(1.0, abs=1e-4)


def test_density_of_unnormalized_state():
    s = Superposition(((1 / math.sqrt(2), GaussianPacket(0.0, 1.0, 0.0)),), check_norm=False)
    assert norm_integral(s, 0, S) == pytest.approx(0.5, abs=1e-4)


def test_round_trip_basis_state():
    idx = PhaseIndex(4, 0.2, 0.1, S)
    sp = project_spectrum(HermiteGaussian(idx), 0.2, 0.1, S, N=8)
    x = np.linspace(-5, 5, 41)
    assert np.max(np.abs(reconstruct_sum(sp, x) - phi(idx, x))) < 1e-14


def test_round_trip_displaced_packet():
    pk = GaussianPacket(1.0, 1.0, 0.0)
    sp = project_spectrum(pk, 0.0, 0.0, S, N=30)
    x = np.linspace(-6, 6, 241)
    assert np.max(np.abs(reconstruct_sum(sp, x) - eval_state(pk, x))) < 1e-7
    assert abs(reconstruct_sum(sp, -10.0)) < 1e-10


def test_round_trip_sampled_grid():
    x = np.linspace(-12, 12, 2401)
    pk = GaussianPacket(0.5, 1.1, 0.4)
    grid = SampledGrid(x, eval_state(pk, x))
    sp = project_spectrum(grid, 0.0, 0.0, S, N=40)
    xs = np.linspace(-6, 6, 61)
    assert np.max(np.abs(reconstruct_sum(sp, xs, tail_tol=1e-6) - eval_state(pk, xs))) < 1e-7


def test_round_trip_refuses_heavy_tail():
    sp = project_spectrum(GaussianPacket(3.0, 1.0, 0.0), 0.0, 0.0, S, N=3)
    with pytest.raises(TailTooHeavy):
        reconstruct_sum(sp, 0.0)


def test_grid_projection_matches_analytic(rng):
    x = np.linspace(-12, 12, 2401)
    pk = GaussianPacket(0.5, 1.1, 0.4)
    grid = SampledGrid(x, eval_state(pk, x))
    for n in (0, 2, 5):
        idx = PhaseIndex(n, rng.uniform(-1, 1), rng.uniform(-1, 1), S)
        assert abs(project(grid, idx) - project(pk, idx)) < 1e-8
        assert abs(project(grid, idx, method="quadrature") - project(pk, idx)) < 1e-8


@pytest.mark.parametrize("n", [0, 3])
def test_xp_reconstruction(n):
    pk = GaussianPacket(0.0, 1.0, 0.0)
    for x in (0.0, 0.8):
        r = reconstruct_integral_XP(pk, n, S, x)
        assert abs(r.value - eval_state(pk, x)) < 1e-4


def test_xp_reconstruction_is_independent_of_n():
    pk = GaussianPacket(0.3, 1.3, -0.4)
    vals = [reconstruct_integral_XP(pk, n, ScaleParam(0.9), 0.5).value for n in (0, 3)]
    assert abs(vals[0] - vals[1]) < 1e-4


def test_xp_reconstruction_odd_state():
    r = reconstruct_integral_XP(HermiteGaussian(PhaseIndex(1, 0.0, 0.0, S)), 0, S, 0.0)
    assert abs(r.value) < 1e-10


def test_scale_P_reconstruction():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    r = reconstruct_scale_P(pk, 0, 0.5, 1.5)
    exact = eval_state(pk, 1.5)
    assert abs(r.value - exact) < 1e-2 * abs(exact)
    assert r.error < 1e-3


def test_scale_P_reconstruction_other_order():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    r = reconstruct_scale_P(pk, 2, 0.5, 1.5)
    assert abs(r.value - eval_state(pk, 1.5)) < 1e-2 * abs(eval_state(pk, 1.5))


def test_scale_P_window_sensitivity_is_reported():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    wide = reconstruct_scale_P(pk, 0, 0.5, 1.5)
    narrow = reconstruct_scale_P(pk, 0, 0.5, 1.5, window=20)
    assert narrow.error > 10 * wide.error
    with pytest.raises(WindowSensitive):
        reconstruct_scale_P(pk, 0, 0.5, 1.5, window=20, tol=1e-4)


def test_scale_P_signed_weight_gives_sign_flip():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    r = reconstruct_scale_P(pk, 0, 0.5, -0.5, signed_weight=True)
    exact = eval_state(pk, -0.5)
    assert abs(r.value + exact) < 1e-2 * abs(exact)


def test_scale_P_symmetric_zero_and_tail():
    odd = HermiteGaussian(PhaseIndex(1, 0.0, 0.0, S))
    assert abs(reconstruct_scale_P(odd, 0, 0.7, 0.0).value) < 1e-6
    pk = GaussianPacket(0.5, 1.0, 0.3)
    assert abs(reconstruct_scale_P(pk, 0, 0.5, 10.5).value) < 1e-6


def test_scale_X_reconstruction():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    p = 0.3 + 0.5
    r = reconstruct_scale_X(pk, 0, 0.3, p)
    exact = eval_state_momentum(pk, p)
    assert abs(r.value - exact) < 1e-2 * abs(exact)
    assert abs(reconstruct_scale_X(pk, 0, 0.3, 0.3 + 5.0).value) < 1e-6


def test_scale_X_parity_factor_flips_odd_orders():
    pk = GaussianPacket(0.5, 1.0, 0.3)
    exact = eval_state_momentum(pk, 0.8)
    plain = reconstruct_scale_X(pk, 1, 0.3, 0.8).value
    with_factor = reconstruct_scale_X(pk, 1, 0.3, 0.8, parity_factor=True).value
    assert abs(plain - exact) < 1e-2 * abs(exact)
    assert abs(with_factor + exact) < 1e-2 * abs(exact)


def test_momentum_eval_of_grid_rejected():
    x = np.linspace(-5, 5, 11)
    with pytest.raises(TypeError):
        eval_state_momentum(SampledGrid(x, np.ones_like(x)), 0.0)


def test_phase_field_independent_of_workers():
    pk = GaussianPacket(0.3, 1.2, -0.2)
    X = np.linspace(-4, 4, 150)
    P = np.linspace(-2, 2, 37)
    a = phase_field(pk, 2, X, P, S, workers=1)
    b = phase_field(pk, 2, X, P, S, workers=3)
    assert np.array_equal(a, b)
    assert np.array_equal(a[17], phase_wavefunction(pk, 2, X[17], P, S))


def test_spectrum_json_round_trip():
    sp = project_spectrum(GaussianPacket(0.4, 1.1, 0.2, 1.5), 0.1, -0.1, ScaleParam(0.9, 1.5), N=12)
    d = json.loads(json.dumps(sp.to_dict()))
    assert set(d) == {"base", "amplitudes", "tail_bound"}
    back = Spectrum.from_dict(d)
    assert np.array_equal(back.amplitudes, sp.amplitudes)
    assert (back.X, back.P, back.scale, back.tail_bound) == (sp.X, sp.P, sp.scale, sp.tail_bound)


def test_spectrum_rejects_excess_probability():
    with pytest.raises(ValueError):
        Spectrum(0.0, 0.0, S, np.array([1.0, 0.5]), 0.0)
