import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakosc.continuum import (
    ContinuumProfile,
    Window,
    check_fast_condition,
    closed_form_weak_value,
    continuum_averaged_quadrature,
    continuum_averaged_weak_value,
    continuum_mixed_closed_form,
    continuum_mixed_weak_value,
    continuum_weak_value,
    countable_reduction,
    countable_reference,
    four_term_weak_value,
    tailored_postselection,
    window_phase,
)
from weakosc.errors import VanishingAmplitude


def gaussian(mu=0.0, w=1.0):
    return lambda x: np.exp(-((x - mu) ** 2) / (4 * w * w))


def profile(bins=512, fn=None, Omega=1e6, Phi=0.0, delta_x=None, delta_t=0.1):
    return ContinuumProfile.from_function(fn or gaussian(), -6.4, 6.4, bins, Omega, Phi, delta_x, delta_t)


W = Window(0.3, 1.0)


def test_fast_condition_examples():
    base = dict(Phi=0.0, delta_x=0.01, delta_t=0.01)
    assert check_fast_condition(profile(Omega=2 * math.pi * 1e6 * 100, **base)).is_fast
    # 1e7 gives 159 cycles per window, which is fast; one decade lower is not
    assert check_fast_condition(profile(Omega=1e7, **base)).cycles_in_window == pytest.approx(159.15, abs=0.01)
    assert not check_fast_condition(profile(Omega=1e6, **base)).is_fast
    assert not check_fast_condition(profile(Omega=0.0, **base)).is_fast


def test_profile_normalized():
    p = profile(256)
    assert np.sum(p.amplitude ** 2) * p.h == pytest.approx(1.0, abs=1e-12)


def test_tailored_constant_amplitude():
    x = -2 + (np.arange(40) + 0.5) * 0.1
    c = 1 / math.sqrt(4.0)
    p = ContinuumProfile(x, np.full(40, c), 1.0, 0.0, 0.1, 1.0)
    post = tailored_postselection(p, Window(0.0, 0.5), 1.0, 1.0)
    assert np.allclose(post.samples, post.N / c)
    assert np.sum(post.samples ** 2) * p.h == pytest.approx(1.0)


def test_tailored_vanishing_amplitude():
    x = -2 + (np.arange(40) + 0.5) * 0.1
    a = np.ones(40)
    a[20] = 0.0
    a /= math.sqrt(np.sum(a * a) * 0.1)
    with pytest.raises(VanishingAmplitude):
        tailored_postselection(ContinuumProfile(x, a, 1.0, 0.0, 0.1, 1.0), Window(0.0, 0.5), 1, 1)


def test_tailored_gaussian_ratio():
    p = profile()
    post = tailored_postselection(p, W, 2.0, 1.0)
    prod = post.samples * p.amplitude[post.start:post.start + 2 * post.half_bins]
    m = post.half_bins
    assert np.allclose(prod[:m], prod[0]) and np.allclose(prod[m:], prod[-1])
    assert prod[0] / prod[-1] == pytest.approx(2.0)


def test_instantaneous_examples():
    p = profile()
    pixel = ContinuumProfile.from_bin_probabilities(p.grid, p.amplitude ** 2, p.Omega)
    assert abs(continuum_weak_value(pixel, tailored_postselection(pixel, W, 1.0, 1.0), W, 0.0).value) <= 1e-15
    # with a smooth amplitude inside each bin the zero holds up to the O(h^2) discretization error
    assert abs(continuum_weak_value(p, tailored_postselection(p, W, 1.0, 1.0), W, 0.0).value) <= 1e-5
    post = tailored_postselection(p, W, 2.0, 1.0)
    assert continuum_weak_value(p, post, W, 0.0).value == pytest.approx(1 / 3, abs=1e-5)


def refinement_errors(bins_list, C1=2.0, C2=1.0, t=0.7e-6):
    errs = []
    for n in bins_list:
        p = profile(n)
        post = tailored_postselection(p, W, C1, C2)
        want = closed_form_weak_value(C1, C2, window_phase(p, post, t))
        errs.append(abs(continuum_weak_value(p, post, None, t).value - want))
    return np.array(errs)


def test_refinement_second_order():
    errs = refinement_errors([128, 256, 512])
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all((orders > 1.9) & (orders < 2.1))


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-50, 50))
def test_four_term_equals_closed(c1, c2, theta):
    # away from the removable zeros of 1 - e^{i theta}, where cancellation costs digits
    if abs(1 - np.exp(1j * theta)) < 1e-3:
        theta += 0.5
    assert abs(four_term_weak_value(c1, c2, theta) - closed_form_weak_value(c1, c2, theta)) <= 1e-12 * max(
        1, abs(closed_form_weak_value(c1, c2, theta)))


def test_four_term_removable_points():
    for theta in (0.0, 2 * math.pi, -4 * math.pi):
        assert four_term_weak_value(2.0, 1.0, theta) == pytest.approx(1 / 3)
    assert four_term_weak_value(1.0, 1.0, 0.0) == 0


def test_averaged_examples():
    p = profile()
    assert continuum_averaged_weak_value(p, tailored_postselection(p, W, 2, 1)).value == 1
    assert continuum_averaged_weak_value(p, tailored_postselection(p, W, 1, 2)).value == -1
    assert continuum_averaged_weak_value(p, tailored_postselection(p, W, 1, 1)).value == 0


def test_averaged_warns_when_slow():
    p = profile(Omega=10.0)
    with pytest.warns(RuntimeWarning):
        continuum_averaged_weak_value(p, tailored_postselection(p, W, 2, 1))


def test_mixed_examples():
    p = profile()
    for c1, c2, want in ((2, 1, 0.6), (1, 1, 0.0), (1, 3, -0.8)):
        assert continuum_mixed_weak_value(p, tailored_postselection(p, W, c1, c2)).real == pytest.approx(want,
                                                                                                          abs=1e-12)
        assert continuum_mixed_closed_form(c1, c2) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("fn,Omega,Phi,window", [
    (gaussian(), 1e6, 0.0, Window(0.3, 1.0)),
    (gaussian(0.5, 1.5), 3e5, 2.0, Window(-0.5, 0.5)),
    (lambda x: 1 + 0.5 * np.cos(x), 1e6, -7.0, Window(1.0, 2.0)),
])
def test_sgn_law_independent_of_shape_and_rates(fn, Omega, Phi, window):
    p = profile(512, fn=fn, Omega=Omega, Phi=Phi)
    for c1, c2 in ((3, 1), (1, 2)):
        post = tailored_postselection(p, window, c1, c2)
        assert abs(continuum_averaged_quadrature(p, post) - np.sign(1 - (c2 / c1) ** 2)) <= 1e-3


def test_off_window_content_irrelevant():
    a = profile(256, fn=gaussian())
    b = profile(256, fn=lambda x: np.exp(-x * x / 4) + 5 * np.exp(-((x - 4) ** 2) / 0.05))
    pa, pb = tailored_postselection(a, W, 2, 1), tailored_postselection(b, W, 2, 1)
    for t in (0.0, 1.3e-6, 4e-6):
        assert continuum_weak_value(a, pa, None, t).value == pytest.approx(continuum_weak_value(b, pb, None, t).value,
                                                                           abs=1e-6)


def test_countable_examples():
    equal = np.array([0.5, 0.5, 0.4, 0.3, 0.2], dtype=complex)
    averaged, mixed = countable_reduction(equal / np.linalg.norm(equal), 0, 1, 1.0)
    assert abs(averaged.real) <= 1e-10 and abs(mixed.value) <= 1e-12
    amps = np.array([0.6, 0.3, 0.5, 0.4, 0.2]) * np.exp(1j * np.arange(5))
    averaged, mixed = countable_reduction(amps, 0, 1, 1.0)
    assert averaged.value == pytest.approx(1.0, abs=1e-10)
    assert mixed.value == pytest.approx(0.6, abs=1e-12)
    ref_avg, ref_mix = countable_reference(amps, 0, 1, 1.0)
    assert ref_avg.value == 1 and ref_mix.real == pytest.approx(0.6)


def test_countable_spectators_irrelevant():
    amps = np.array([0.6, 0.3, 0.5, 0.4, 0.2], dtype=complex)
    other = amps.copy()
    other[2:] *= np.array([3.0, 0.1, 2.0])
    a1, m1 = countable_reduction(amps / np.linalg.norm(amps), 0, 1, 0.8)
    a2, m2 = countable_reduction(other / np.linalg.norm(other), 0, 1, 0.8)
    assert a1.value == pytest.approx(a2.value, abs=1e-10)
    assert m1.value == pytest.approx(m2.value, abs=1e-12)
