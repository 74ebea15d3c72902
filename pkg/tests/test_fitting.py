import math

import numpy as np
import pytest

from slitforest.analytics import ChannelHistogram, curve_histogram
from slitforest.fitting import (
    FlatDataError,
    count_minima,
    fit_interference,
    lambda_bound_from_minima,
)
from slitforest.physics import (
    Geometry,
    ModelParams,
    Screen,
    fringe_count,
    predicted_channel_distribution,
)


def eq1_histogram(k=1000.0):
    return curve_histogram(predicted_channel_distribution(ModelParams(), Screen.TWO_SLIT), k=k)


def ref_two_slit(x, lam=4.0, d=14.0, D=40.0):
    total = 0.0
    cross = 1.0
    rs = []
    for slit in (-d / 2, d / 2):
        r = math.sqrt(D * D + (x - slit) ** 2)
        rs.append(r)
        total += D * D / r ** 3
    ea, eb = (D * D / r ** 3 for r in rs)
    return total + 2 * math.sqrt(ea * eb) * math.cos(2 * math.pi * (rs[0] - rs[1]) / lam) * cross


def test_self_fit_recovers_exact_parameters():
    fit = fit_interference(eq1_histogram(), Screen.TWO_SLIT)
    assert fit.lam == 4.0
    assert fit.D == 40.0
    assert fit.d == 14.0
    assert fit.residual < 1e-24
    assert fit.scale == pytest.approx(1000.0, rel=1e-12)
    assert fit.free == ("lambda",)


def test_self_fit_with_free_distance():
    fit = fit_interference(eq1_histogram(), Screen.TWO_SLIT, free=("lambda", "D"))
    assert fit.lam == 4.0
    assert fit.D == 40.0
    assert fit.residual < 1e-24


def test_dip_self_fit():
    curve = predicted_channel_distribution(
        ModelParams(interference_sign=-1), Screen.ONE_SLIT_CENTER)
    fit = fit_interference(curve_histogram(curve), Screen.ONE_SLIT_CENTER)
    assert fit.lam == 4.0
    assert fit.residual < 1e-24
    assert fit.params.hd == pytest.approx(8.0)


def test_fit_curve_reproduces_raw_units():
    h = eq1_histogram(k=5000.0)
    fit = fit_interference(h, Screen.TWO_SLIT)
    assert np.allclose(fit.curve(), h.bins, atol=1e-9)


def test_sampled_fit_lambda_within_tolerance():
    dist = predicted_channel_distribution(ModelParams(), Screen.TWO_SLIT)
    rng = np.random.default_rng(12)
    counts = rng.multinomial(20000, dist).astype(float)
    h = ChannelHistogram(bins=counts, n_attempts_registered=20000)
    fit = fit_interference(h, Screen.TWO_SLIT)
    assert 3.75 <= fit.lam <= 4.25


def test_fit_idempotent_within_grid_step():
    dist = predicted_channel_distribution(ModelParams(), Screen.TWO_SLIT)
    rng = np.random.default_rng(3)
    counts = rng.multinomial(5000, dist).astype(float)
    first = fit_interference(
        ChannelHistogram(bins=counts, n_attempts_registered=5000), Screen.TWO_SLIT)
    regenerated = curve_histogram(
        predicted_channel_distribution(first.params, Screen.TWO_SLIT))
    second = fit_interference(regenerated, Screen.TWO_SLIT)
    assert abs(second.lam - first.lam) <= 0.01 + 1e-9
    assert second.D == first.D


def test_mask_invariance_on_clean_data():
    plain = fit_interference(eq1_histogram(), Screen.TWO_SLIT)
    masked = fit_interference(eq1_histogram(), Screen.TWO_SLIT, mask=(25, 39))
    assert masked.lam == plain.lam
    assert masked.mask == (25, 39)


def test_fit_respects_custom_bounds():
    fit = fit_interference(eq1_histogram(), Screen.TWO_SLIT,
                           bounds={"lambda": (5.0, 9.0)})
    assert 5.0 <= fit.lam <= 9.0


def test_flat_histogram_rejected():
    flat = ChannelHistogram(bins=np.full(63, 4.0), n_attempts_registered=0, rate_k=1000.0)
    with pytest.raises(FlatDataError):
        fit_interference(flat, Screen.TWO_SLIT)
    empty = ChannelHistogram(bins=np.zeros(63), n_attempts_registered=0)
    with pytest.raises(FlatDataError):
        fit_interference(empty, Screen.TWO_SLIT)


def test_fit_argument_validation():
    h = eq1_histogram()
    with pytest.raises(ValueError):
        fit_interference(h, Screen.TWO_SLIT, mask=tuple(range(1, 64)))
    with pytest.raises(ValueError):
        fit_interference(h, Screen.TWO_SLIT, mask=(0,))
    with pytest.raises(ValueError):
        fit_interference(h, Screen.TWO_SLIT, free=("hd",))
    with pytest.raises(ValueError):
        fit_interference(h, Screen.TWO_SLIT, bounds={"lambda": (9.0, 5.0)})


def test_windowed_minima_match_dense_scan():
    g = Geometry()
    xs = np.arange(-31.0, 31.0 + 1e-9, 0.01)
    dense = [ref_two_slit(float(x)) for x in xs]
    dense_count = sum(
        1 for i in range(1, len(dense) - 1)
        if dense[i] < dense[i - 1] and dense[i] < dense[i + 1])
    curve = predicted_channel_distribution(ModelParams(geometry=g), Screen.TWO_SLIT)
    assert count_minima(curve) == dense_count == 4


def test_count_minima_basic_shapes():
    assert count_minima(np.arange(20.0)) == 0
    # minima placed on sample points so they stay strict after smoothing
    t = (np.arange(63) + 0.5) / 63 * 3 * 2 * np.pi
    assert count_minima(np.cos(t)) == 3
    with pytest.raises(ValueError):
        count_minima([1.0, 2.0, 1.0])


def test_lambda_bound_arithmetic():
    assert lambda_bound_from_minima(14, 6) == pytest.approx(28 / 6)
    assert lambda_bound_from_minima(14, 6) <= 4.7
    assert lambda_bound_from_minima(14, 7) == 4.0
    assert lambda_bound_from_minima(14, 28) == 1.0
    assert lambda_bound_from_minima(14, fringe_count(14, 4.0)) == 4.0
    with pytest.raises(ValueError):
        lambda_bound_from_minima(14, 0)
    with pytest.raises(ValueError):
        lambda_bound_from_minima(-1, 3)


def test_lambda_error_shrinks_with_data_volume():
    dist = predicted_channel_distribution(ModelParams(), Screen.TWO_SLIT)
    errors = []
    for size in (1000, 10000, 100000):
        errs = []
        for seed in range(6):
            rng = np.random.default_rng(100 + seed)
            counts = rng.multinomial(size, dist).astype(float)
            h = ChannelHistogram(bins=counts, n_attempts_registered=size)
            errs.append(abs(fit_interference(h, Screen.TWO_SLIT).lam - 4.0))
        errors.append(sum(errs) / len(errs))
    assert errors[0] > errors[1] > errors[2]
