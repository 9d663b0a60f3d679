import cmath
import math

import numpy as np
import pytest

from phasekit.basis import GaussianPacket, HermiteGaussian
from phasekit.kernel import (
    CapExceeded,
    TailTooHeavy,
    chi_closed,
    chi_closed_arrays,
    chi_equal_scale,
    chi_quadrature,
    kernel_transport,
)
from phasekit.scales import PhaseIndex, ScaleParam
from phasekit.transform import Spectrum, project, project_spectrum


def random_index(rng, n_max=8, hbar=1.0):
    return PhaseIndex(
        int(rng.integers(0, n_max + 1)),
        rng.uniform(-2, 2),
        rng.uniform(-2, 2),
        ScaleParam(rng.uniform(0.4, 2.0), hbar),
    )


def test_closed_form_matches_quadrature_random_draws(rng):
    worst = 0.0
    for _ in range(50):
        left, right = random_index(rng), random_index(rng)
        worst = max(worst, abs(chi_closed(left, right) - chi_quadrature(left, right)))
    assert worst < 1e-9


def test_closed_form_matches_quadrature_with_nonunit_hbar(rng):
    for _ in range(10):
        left, right = random_index(rng, hbar=0.37), random_index(rng, hbar=0.37)
        assert abs(chi_closed(left, right) - chi_quadrature(left, right)) < 1e-9


def test_closed_form_specific_case():
    left = PhaseIndex(2, 0.3, 1.1, ScaleParam(1.0))
    right = PhaseIndex(1, -0.4, 0.2, ScaleParam(0.7))
    assert abs(chi_closed(left, right) - chi_quadrature(left, right)) < 1e-9


@pytest.mark.parametrize("n", range(13))
def test_orthonormal_at_coincident_labels(n):
    s = ScaleParam(0.8)
    for n2 in range(13):
        c = chi_closed(PhaseIndex(n, 0.5, -0.2, s), PhaseIndex(n2, 0.5, -0.2, s))
        assert abs(c - (n == n2)) < 1e-12


def test_ground_state_displacement_in_position():
    s = ScaleParam(1.3)
    c = chi_closed(PhaseIndex(0, 0.0, 0.4, s), PhaseIndex(0, 2 * s.a, 0.4, s))
    assert c == pytest.approx(math.exp(-0.5), rel=1e-14)


def test_equal_scale_ground_state_is_envelope(rng):
    s = ScaleParam(0.9)
    for _ in range(5):
        X, P, X2, P2 = rng.uniform(-2, 2, 4)
        env = math.exp(-((X - X2) ** 2) / (8 * s.A) - (P - P2) ** 2 / (8 * s.B))
        phase = -(X + X2) * (P - P2) / (2 * s.hbar)
        expected = env * cmath.exp(1j * phase)
        assert abs(chi_equal_scale(PhaseIndex(0, X, P, s), PhaseIndex(0, X2, P2, s)) - expected) < 1e-14


def test_equal_scale_displaced_in_both_directions():
    s = ScaleParam(1.0)
    c = chi_equal_scale(PhaseIndex(0, 2 * s.a, 2 * s.b, s), PhaseIndex(0, 0.0, 0.0, s))
    assert abs(c - math.exp(-1) * cmath.exp(-1j)) < 1e-15


def test_equal_scale_phase_uses_sum_of_positions():
    # with both positions nonzero the phase depends on X + X', which pins the convention
    s = ScaleParam(1.0)
    left, right = PhaseIndex(0, 1.0, 0.7, s), PhaseIndex(0, 0.6, -0.3, s)
    assert abs(chi_equal_scale(left, right) - chi_quadrature(left, right)) < 1e-13


def test_equal_scale_agrees_with_general_form(rng):
    for _ in range(30):
        left = random_index(rng)
        right = PhaseIndex(int(rng.integers(0, 9)), rng.uniform(-2, 2), rng.uniform(-2, 2), left.scale)
        assert abs(chi_equal_scale(left, right) - chi_closed(left, right)) < 1e-12


def test_equal_scale_orthogonal_at_coincidence():
    assert abs(chi_equal_scale(PhaseIndex(1, 0.3, 0.3), PhaseIndex(0, 0.3, 0.3))) < 1e-15


def test_equal_scale_rejects_different_scales():
    with pytest.raises(ValueError):
        chi_equal_scale(PhaseIndex(0, scale=ScaleParam(1.0)), PhaseIndex(0, scale=ScaleParam(2.0)))


def test_hbar_mismatch_rejected():
    with pytest.raises(ValueError):
        chi_closed(PhaseIndex(0, scale=ScaleParam(1.0, 1.0)), PhaseIndex(0, scale=ScaleParam(1.0, 2.0)))


def test_hermitian_symmetry(rng):
    for _ in range(30):
        left, right = random_index(rng), random_index(rng)
        assert abs(chi_closed(left, right) - np.conj(chi_closed(right, left))) < 1e-12


def test_contraction(rng):
    for _ in range(10):
        left, right = random_index(rng), random_index(rng)
        total = sum(abs(chi_closed(left, right.with_n(m))) ** 2 for m in range(31))
        assert total <= 1 + 1e-10


def test_cap():
    with pytest.raises(CapExceeded):
        chi_closed(PhaseIndex(31), PhaseIndex(0))
    chi_closed(PhaseIndex(31), PhaseIndex(0), cap=40)


def test_broadcast_matches_scalar(rng):
    s, s2 = ScaleParam(0.8), ScaleParam(1.2)
    X = np.linspace(-2, 2, 5)
    P = np.linspace(-1, 1, 4)
    grid = chi_closed_arrays(3, X[:, None], P[None, :], s, 2, 0.3, -0.1, s2)
    for i, j in [(0, 0), (2, 3), (4, 1)]:
        single = chi_closed(PhaseIndex(3, X[i], P[j], s), PhaseIndex(2, 0.3, -0.1, s2))
        assert grid[i, j] == pytest.approx(single, abs=1e-15)


def basis_spectrum(idx, N=10):
    amps = np.zeros(N + 1, dtype=complex)
    amps[idx.n] = 1.0
    return Spectrum(idx.X, idx.P, idx.scale, amps, 0.0)


def test_transport_of_basis_state_is_kernel(rng):
    src = PhaseIndex(0, 0.4, -0.6, ScaleParam(1.1))
    sp = basis_spectrum(src)
    for _ in range(5):
        target = random_index(rng, n_max=6)
        assert kernel_transport(sp, target) == pytest.approx(chi_closed(target, src), abs=1e-15)


def test_transport_to_same_label_is_identity():
    s = ScaleParam(0.9)
    pk = GaussianPacket(0.3, 1.2, 0.1)
    sp = project_spectrum(pk, 0.5, -0.5, s, N=40)
    for n in (0, 1, 5):
        assert abs(kernel_transport(sp, PhaseIndex(n, 0.5, -0.5, s)) - sp.amplitudes[n]) < 1e-12


def test_transport_matches_direct_projection(rng):
    pk = GaussianPacket(0.2, 1.3, -0.4)
    sp = project_spectrum(pk, 0.0, 0.0, ScaleParam(1.0), N=40)
    for _ in range(10):
        target = random_index(rng, n_max=6)
        target = PhaseIndex(target.n, target.X / 2, target.P / 2, target.scale)
        assert abs(kernel_transport(sp, target) - project(pk, target)) < 1e-7


def test_transport_rejects_heavy_tail():
    amps = np.zeros(3, dtype=complex)
    amps[0] = 0.9
    sp = Spectrum(0.0, 0.0, ScaleParam(1.0), amps, 1 - 0.81)
    with pytest.raises(TailTooHeavy):
        kernel_transport(sp, PhaseIndex(0))
