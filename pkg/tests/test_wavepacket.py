"""Tests for the free-wavepacket position/momentum-cell example.

Oracles: mpmath (30+ digits) for the complex error functions, direct
scipy quadrature for overlaps and propagated states, and analytically
validated tail models for the honest truncation bookkeeping.  Frozen
reference numbers in this file were produced by those oracles.
"""

from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from seqmeas.model import ValidationError
from seqmeas.wavepacket import (
    DEFAULT_N_P,
    DEFAULT_N_X,
    EntropyCurvePoint,
    TruncatedTable,
    WavepacketConfig,
    _erfi_grid,
    cell_overlap,
    complex_erf,
    complex_erfi,
    conditional_kernel,
    entropy_curve,
    entropy_curve_csv,
    erfi_line,
    evolved_cell_state,
    first_marginal,
    scaled_erf_segment,
    second_marginal,
    transition_amplitude,
    transition_probability,
)


def _psi(x: float, sigma: float) -> float:
    """The width-sigma Gaussian, unit norm: pi^(-1/4) sigma^(-1/2) e^(-x^2/(2 sigma^2))."""
    return math.pi ** (-0.25) * sigma ** (-0.5) * math.exp(-x * x / (2.0 * sigma * sigma))


def _quad_complex(f, a: float, b: float, limit: int = 300) -> complex:
    re, _ = quad(lambda x: f(x).real, a, b, limit=limit)
    im, _ = quad(lambda x: f(x).imag, a, b, limit=limit)
    return re + 1j * im


# ------------------------------------------------------ complex error functions


def test_complex_erf_against_mpmath():
    mpmath.mp.dps = 30
    pts = [0.3 + 0.0j, -1.2 + 0.7j, 2.0 - 3.0j, 0.25 + 4.0j, -5.0 - 1.0j, 6.0 + 5.5j]
    for z in pts:
        want = complex(mpmath.erf(mpmath.mpc(z.real, z.imag)))
        got = complex(complex_erf(z))
        assert abs(got - want) <= 5e-13 * max(1.0, abs(want))


def test_complex_erfi_against_mpmath():
    mpmath.mp.dps = 30
    pts = [0.5 + 0.0j, 0.0 + 2.0j, 1.5 - 2.5j, -3.0 + 1.0j, 2.2 + 2.2j]
    for z in pts:
        want = complex(mpmath.erfi(mpmath.mpc(z.real, z.imag)))
        got = complex(complex_erfi(z))
        assert abs(got - want) <= 5e-13 * max(1.0, abs(want))


def test_erfi_line_matches_mpmath_and_stays_bounded():
    """erfi on the pi/4 line is Fresnel-like: exactly bounded, never overflows."""
    mpmath.mp.dps = 30
    for t in (1e-4, 0.01, 1.0):
        for u in (-37.0, -2.0, 0.0, 0.3, 5.0, 400.0):
            z = (1.0 + 1.0j) * u / (2.0 * math.sqrt(t))
            want = complex(mpmath.erfi(mpmath.mpc(z.real, z.imag)))
            got = complex(erfi_line(u, t))
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))
    u_grid = np.linspace(-500.0, 500.0, 10001)
    for t in (1e-4, 1e-2, 1.0, 25.0):
        vals = np.abs(erfi_line(u_grid, t))
        assert np.all(np.isfinite(vals))
        assert vals.max() < 1.35
    with pytest.raises(ValidationError):
        erfi_line(1.0, 0.0)


def test_scaled_erf_segment_against_mpmath():
    """e^{-a^2} (erf(x1 + ia) - erf(x0 + ia)) where the factors overflow separately."""
    mpmath.mp.dps = 60
    cases = [(0.0, 0.7, 0.0), (-1.3, 2.0, 1.0), (0.4, 1.1, 6.0),
             (-2.0, -0.5, 11.0), (3.0, 4.0, 20.0), (-40.0, 40.0, 35.0)]
    for x0, x1, a in cases:
        want = complex(mpmath.exp(-mpmath.mpf(a) ** 2)
                       * (mpmath.erf(mpmath.mpc(x1, a)) - mpmath.erf(mpmath.mpc(x0, a))))
        got = complex(scaled_erf_segment(x0, x1, a))
        assert abs(got - want) <= 1e-12 * max(1e-3, abs(want)), (x0, x1, a)


def test_scaled_erf_segment_rejects_negative_a():
    with pytest.raises(ValidationError):
        scaled_erf_segment(0.0, 1.0, -1.0)


# ------------------------------------------------------------- cell overlaps


def test_cell_overlap_against_quadrature():
    for nu, n, sigma in [(0, 0, 1.0), (0, 1, 1.0), (2, -3, 0.7), (-1, 2, 1.5),
                         (3, 7, 1.0), (-4, -12, 0.9)]:
        want = _quad_complex(
            lambda x: _psi(x, sigma) * cmath.exp(-2j * math.pi * n * x), nu, nu + 1)
        got = complex(np.asarray(cell_overlap(nu, n, sigma)).ravel()[0])
        assert abs(got - want) < 1e-13


def test_cell_overlap_conjugation_and_validation():
    a = complex(np.asarray(cell_overlap(1, 4, 1.2)).ravel()[0])
    b = complex(np.asarray(cell_overlap(1, -4, 1.2)).ravel()[0])
    assert a == pytest.approx(b.conjugate(), abs=1e-16)
    with pytest.raises(ValidationError):
        cell_overlap(0, 0, 0.0)


# ------------------------------------------------------------ first marginal


def test_first_marginal_bookkeeping_and_symmetry():
    src = first_marginal(1.0, 4, 32)
    assert src.table.shape == (9, 65)
    np.testing.assert_array_equal(src.first_index, np.arange(-4, 5))
    assert src.table.sum() == pytest.approx(1.0 - src.mass_deficit, abs=1e-15)
    # the even Gaussian maps cell nu onto cell -1-nu with reflected momentum
    for nu in range(-4, 4):
        i, i_ref = nu + 4, (-1 - nu) + 4
        np.testing.assert_allclose(src.table[i], src.table[i_ref, ::-1],
                                   rtol=1e-12, atol=1e-18)


def test_first_marginal_frozen_entropy():
    """Converged window: frozen from the validated closed-form pipeline."""
    src = first_marginal(1.0, 8, 512)
    assert src.entropy() == pytest.approx(1.3851619836934037, abs=1e-12)
    assert src.mass_deficit == pytest.approx(4.3767427343466281e-05, rel=1e-9)


def test_first_marginal_against_mpmath_window():
    """Small window, frozen from a 40-digit mpmath quadrature of the table."""
    src = first_marginal(1.0, 3, 20)
    assert src.entropy() == pytest.approx(1.3705513956050956, abs=1e-11)
    assert 1.0 - src.mass_deficit == pytest.approx(0.99889504897441195, abs=1e-11)


def test_first_marginal_momentum_tail_model():
    """The uncaptured mass decays like 1/(4 pi^2 N_p) (edge-discontinuity tail)."""
    d1 = first_marginal(1.0, 8, 256).mass_deficit
    d2 = first_marginal(1.0, 8, 512).mass_deficit
    for n_p, d in ((256, d1), (512, d2)):
        model = 1.0 / (4.0 * math.pi ** 2 * n_p)
        assert 0.7 * model < d < 1.3 * model
    assert d2 < d1


# ------------------------------------------------------------- evolved cells


def test_evolved_cell_state_t0_is_the_cell():
    x = np.array([-0.5, 0.25, 0.75, 1.5])
    got = evolved_cell_state(0, 3, 0.0, x)
    assert got[0] == 0.0 and got[3] == 0.0
    assert got[1] == pytest.approx(cmath.exp(2j * math.pi * 3 * 0.25), abs=1e-15)


def test_evolved_cell_state_matches_propagator():
    """Convolution with the free kernel e^{i x^2 / 2t} / sqrt(2 pi i t)."""
    for nu, n, t, x in [(0, 0, 0.5, 0.3), (0, 0, 0.5, 2.1), (1, 2, 0.25, 1.7),
                        (-1, -3, 0.1, -0.4)]:
        pref = 1.0 / cmath.sqrt(2j * math.pi * t)
        want = _quad_complex(
            lambda y: pref * cmath.exp(1j * (x - y) ** 2 / (2 * t) + 2j * math.pi * n * y),
            nu, nu + 1, limit=400)
        got = complex(evolved_cell_state(nu, n, t, np.array([x]))[0])
        assert abs(got - want) < 1e-10


def test_evolved_cell_state_norm_with_tail_model():
    """Captured norm on [-D, 1+D] matches 1 - 2t/(pi (D + 1/2)) (long x^-2 tail)."""
    t, d = 0.25, 40.0
    xs = np.linspace(-d, 1.0 + d, 200001)
    phi = evolved_cell_state(0, 0, t, xs)
    norm = float(np.trapezoid(np.abs(phi) ** 2, xs))
    tail = 2.0 * t / (math.pi * (d + 0.5))
    assert abs((1.0 - norm) - tail) < 0.1 * tail


def test_evolved_cell_state_rejects_negative_time():
    with pytest.raises(ValidationError):
        evolved_cell_state(0, 0, -0.1, np.array([0.0]))


# ------------------------------------------------------ transition amplitudes


def test_transition_probability_frozen_pair():
    """The t = 1 cross pair; also the benchmark asymmetry of the kernel."""
    p_a = transition_probability(1, 1, 0, 0, 1.0)
    p_b = transition_probability(0, 0, 1, 1, 1.0)
    assert p_a == pytest.approx(0.0048394632170430931, rel=1e-12)
    assert p_b == pytest.approx(0.0025899694985521016, rel=1e-12)
    # the weighted-detailed-balance symmetry of real protocols is violated
    assert abs(p_a - p_b) > 2e-3


def test_transition_amplitude_against_quadrature():
    """A(mu, m | nu, n; t) = integral of e^{-2 pi i m x} <x|nu, n, t> over the cell."""
    for mu, m, nu, n, t in [(1, 1, 0, 0, 1.0), (0, 0, 1, 1, 1.0),
                            (2, -1, 0, 2, 0.3), (0, 3, 0, 3, 0.7)]:
        want = _quad_complex(
            lambda x: cmath.exp(-2j * math.pi * m * x)
            * complex(evolved_cell_state(nu, n, t, np.array([x]))[0]),
            mu, mu + 1, limit=400)
        got = transition_amplitude(mu, m, nu, n, t)
        assert abs(got - want) < 1e-10, (mu, m, nu, n, t)


def test_transition_probability_translation_invariance():
    """p(mu, m | nu, n) depends on nu - mu only (lattice translation symmetry)."""
    rng = np.random.default_rng(3)
    for _ in range(6):
        mu, nu = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
        m, n = int(rng.integers(-4, 5)), int(rng.integers(-4, 5))
        s = int(rng.integers(-5, 6))
        t = float(rng.uniform(0.05, 1.5))
        a = transition_probability(mu, m, nu, n, t)
        b = transition_probability(mu + s, m, nu + s, n, t)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_transition_probability_parity():
    """Spatial inversion: p(-1-mu, -m | -1-nu, -n) = p(mu, m | nu, n)."""
    for mu, m, nu, n, t in [(1, 1, 0, 0, 1.0), (2, -1, 0, 2, 0.3), (0, 4, -1, 1, 0.6)]:
        a = transition_probability(mu, m, nu, n, t)
        b = transition_probability(-1 - mu, -m, -1 - nu, -n, t)
        assert a == pytest.approx(b, rel=1e-12)


def _row_mass(n: int, t: float, m_half: int, w: int) -> float:
    m_vals = np.arange(-m_half, m_half + 1)
    c = int(np.rint(2.0 * math.pi * n * t))
    d_vals = np.arange(-c - w, -c + w + 1)
    d_ext = np.arange(d_vals[0] - 1, d_vals[-1] + 2)
    f_m = _erfi_grid(m_vals, d_ext, t)
    f_n = _erfi_grid(np.array([n]), d_ext, t)[0]
    return float(conditional_kernel(n, t, m_vals, d_vals, f_m, f_n).sum())


def test_conditional_row_mass_tail_models():
    """Row sums approach one with understood tails.

    The momentum truncation leaves ~1/(pi^2 M); the position window leaves
    ~2t/(pi W) once the spreading has crossed the window scale.  Both
    constants were validated against direct quadrature.
    """
    # position-tail dominated
    deficit = 1.0 - _row_mass(0, 1.0, 200, 40)
    model = 1.0 / (math.pi ** 2 * 200) + 2.0 * 1.0 / (math.pi * 40)
    assert abs(deficit - model) < 0.1 * model
    # momentum-tail dominated (position tail still Gaussian-suppressed)
    deficit2 = 1.0 - _row_mass(0, 1e-3, 200, 30)
    model2 = 1.0 / (math.pi ** 2 * 200)
    assert 0.8 * model2 < deficit2 < 2.0 * model2
    # drifted source: the window must track the classical drift 2 pi n t
    deficit3 = 1.0 - _row_mass(37, 0.5, 300, 30)
    model3 = 1.0 / (math.pi ** 2 * 300) + 2.0 * 0.5 / (math.pi * 30)
    assert 0.75 * model3 < deficit3 < 1.25 * model3


def test_conditional_kernel_matches_direct_probabilities():
    n, t, w = 2, 0.4, 8
    m_vals = np.arange(-6, 7)
    c = int(np.rint(2.0 * math.pi * n * t))
    d_vals = np.arange(-c - w, -c + w + 1)
    d_ext = np.arange(d_vals[0] - 1, d_vals[-1] + 2)
    f_m = _erfi_grid(m_vals, d_ext, t)
    f_n = _erfi_grid(np.array([n]), d_ext, t)[0]
    kernel = conditional_kernel(n, t, m_vals, d_vals, f_m, f_n)
    rng = np.random.default_rng(11)
    for _ in range(8):
        a = int(rng.integers(0, m_vals.size))
        b = int(rng.integers(0, d_vals.size))
        d = int(d_vals[b])
        want = transition_probability(-d, int(m_vals[a]), 0, n, t)
        assert kernel[a, b] == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_column_sum_near_one():
    """Doubly stochastic in the column direction too (up to honest truncation)."""
    t, big_k, w = 0.05, 300, 14
    total = 0.0
    for n in range(-big_k, big_k + 1):
        total += _row_mass_for_output(n, t, w)
    assert 1.0 - 5e-3 < total <= 1.0 + 1e-9


def _row_mass_for_output(n: int, t: float, w: int) -> float:
    """Kernel mass the source (*, n) sends onto output momentum m = 0."""
    m_vals = np.array([0])
    c = int(np.rint(2.0 * math.pi * n * t))
    d_vals = np.arange(-c - w, -c + w + 1)
    d_ext = np.arange(d_vals[0] - 1, d_vals[-1] + 2)
    f_m = _erfi_grid(m_vals, d_ext, t)
    f_n = _erfi_grid(np.array([n]), d_ext, t)[0]
    return float(conditional_kernel(n, t, m_vals, d_vals, f_m, f_n).sum())


# ------------------------------------------------------------ second marginal


def test_second_marginal_frozen_values():
    """Default window, frozen from the validated pipeline (t = 1e-3 and 1e-2)."""
    hat = second_marginal(1.0, 1e-3, 8, 512)
    assert hat.entropy() == pytest.approx(1.6557878729421087, abs=1e-10)
    assert hat.mass_deficit == pytest.approx(2.9255017652207727e-4, rel=1e-6)
    hat2 = second_marginal(1.0, 1e-2, 8, 512)
    assert hat2.entropy() == pytest.approx(1.9888439693583391, abs=1e-10)
    assert hat2.mass_deficit == pytest.approx(3.487261510090045e-4, rel=1e-6)


def test_second_marginal_bookkeeping():
    hat = second_marginal(1.0, 0.02, 4, 48, kernel_halfwidth=10)
    assert hat.table.sum() == pytest.approx(1.0 - hat.mass_deficit, abs=1e-15)
    assert np.all(hat.table >= 0.0)
    with pytest.raises(ValidationError):
        second_marginal(1.0, 0.0, 4, 48)


def test_second_marginal_small_time_limit():
    """As t -> 0 the second marginal converges to the first entrywise."""
    src = first_marginal(1.0, 4, 64)
    hat = second_marginal(1.0, 1e-6, 4, 64, kernel_halfwidth=6)
    diff = hat.table.copy()
    i0 = int(np.searchsorted(hat.first_index, src.first_index[0]))
    j0 = int(np.searchsorted(hat.second_index, src.second_index[0]))
    diff[i0:i0 + src.table.shape[0], j0:j0 + src.table.shape[1]] -= src.table
    assert np.abs(diff).max() < 2e-3
    assert np.abs(diff).sum() < 5e-3


def test_second_marginal_entropy_exceeds_first():
    src = first_marginal(1.0, 4, 48)
    hat = second_marginal(1.0, 0.05, 4, 48, kernel_halfwidth=10)
    assert hat.entropy() > src.entropy()


# -------------------------------------------------------------- entropy curve


def test_entropy_curve_monotone_and_gapped():
    t_values = [0.004, 0.02, 0.1]
    points = entropy_curve(1.0, t_values, n_x=4, n_p=48, kernel_halfwidth=10)
    assert [pt.t for pt in points] == t_values
    s_hat = [pt.s_phat for pt in points]
    for pt in points:
        assert pt.s_phat > pt.s_p
        assert pt.mass_deficit_p < 1e-2
        assert pt.mass_deficit_phat < 2e-2
    assert all(b >= a - 1e-12 for a, b in zip(s_hat, s_hat[1:]))


def test_entropy_curve_csv_format():
    points = [EntropyCurvePoint(t=0.1, s_p=1.25, s_phat=1.5,
                                mass_deficit_p=1e-5, mass_deficit_phat=2e-4,
                                n_x=8, n_p=512)]
    text = entropy_curve_csv(points)
    lines = text.strip().split("\n")
    assert lines[0] == "t,S_p,S_phat,mass_deficit_p,mass_deficit_phat,N_x,N_p"
    cells = lines[1].split(",")
    assert float(cells[0]) == 0.1 and float(cells[2]) == 1.5
    assert cells[5] == "8" and cells[6] == "512"


# ---------------------------------------------------------------- config type


def test_wavepacket_config_invariant():
    cfg = WavepacketConfig()  # defaults must satisfy their own mass bound
    assert cfg.n_x == DEFAULT_N_X and cfg.n_p == DEFAULT_N_P
    with pytest.raises(ValidationError, match="captures only"):
        WavepacketConfig(n_p=128)
    with pytest.raises(ValidationError, match="sigma"):
        WavepacketConfig(sigma=-1.0)
    with pytest.raises(ValidationError, match="nonnegative"):
        WavepacketConfig(t=-0.5)
    # a looser bound admits the smaller window
    ok = WavepacketConfig(n_p=128, mass_tolerance=1e-3)
    assert ok.n_p == 128
