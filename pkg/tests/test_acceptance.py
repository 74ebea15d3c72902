"""End-to-end guarantees, one test per shipped contract.

Each test here states one promise the package makes, from closed-form
model identities through the full simulate -> persist -> replay loop.
Oracles are recomputed inside the test, independent of library internals.
"""
import cmath
import math
import random
import time
from collections import Counter

import numpy as np

from slitforest.agents import (
    AgentSpec,
    make_controller,
    run_agent,
    sample_channel,
)
from slitforest.analytics import (
    Session,
    build_histogram,
    compose_coherent,
    curve_histogram,
    fringe_peak_channels,
)
from slitforest.engine import Engine, Phase, WorldConfig
from slitforest.fitting import count_minima, fit_interference, lambda_bound_from_minima
from slitforest.physics import (
    Geometry,
    ModelParams,
    fringe_count,
    one_slit_dip_intensity,
    predicted_channel_distribution,
    two_slit_intensity,
)
from slitforest.recording import replay, write_session


def test_two_slit_intensity_matches_complex_amplitude_oracle():
    """10^4 random parameter points agree with |F_a + F_b|^2 to 1e-12."""
    rng = random.Random(901)
    start = time.perf_counter()
    for _ in range(10_000):
        lam = rng.uniform(1.0, 20.0)
        d = rng.uniform(lam + 0.5, 30.0)
        dist = rng.uniform(max(30.0, d + 1.0), 80.0)
        x = rng.uniform(-31.0, 31.0)
        g = Geometry(lam=lam, d=d, D=dist)
        got = two_slit_intensity(ModelParams(geometry=g), x)

        def amp(slit_x):
            r = math.sqrt(dist * dist + (x - slit_x) ** 2)
            return (dist / r ** 1.5) * cmath.exp(2j * math.pi * r / lam)

        want = abs(amp(-d / 2.0) + amp(d / 2.0)) ** 2
        assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12)
    assert time.perf_counter() - start < 1.0


def test_one_slit_dip_is_exactly_zero_at_slit_center():
    """10^3 random (D, lambda, hd) all put a hard floating-point zero at the slit."""
    rng = random.Random(902)
    for _ in range(1_000):
        g = Geometry(lam=rng.uniform(1.0, 20.0), D=rng.uniform(10.0, 80.0))
        p = ModelParams(geometry=g, interference_sign=-1,
                        hd=rng.uniform(0.5, 16.0))
        slit_x = rng.uniform(-10.0, 10.0)
        assert one_slit_dip_intensity(p, slit_x, slit_x=slit_x) == 0.0


def test_fringe_count_and_wavelength_bound_arithmetic():
    assert fringe_count(14, 4) == 7.0
    assert lambda_bound_from_minima(14, 6) <= 4.7


def test_channel_minima_count_matches_dense_scan():
    """Minima counted on the 63-channel curve equal a brute-force dense scan."""
    start = time.perf_counter()
    g = Geometry()
    p = ModelParams(geometry=g)
    curve = two_slit_intensity(p, g.channel_xs())
    dense = two_slit_intensity(p, np.arange(-31.0, 31.0, 0.01))
    oracle = int(np.count_nonzero(
        (dense[1:-1] < dense[:-2]) & (dense[1:-1] < dense[2:])))
    assert count_minima(curve) == oracle
    assert time.perf_counter() - start < 1.0


def test_fit_recovers_wavelength_from_sampled_sessions():
    """Sampler -> engine -> histogram -> fit lands within 4.0 +- 0.25 for 5 seeds."""
    start = time.perf_counter()
    for seed in range(1, 6):
        cfg = WorldConfig(mushroom_count=0, rng_seed=seed)
        spec = AgentSpec(kind="model-sampler", attempts=20_000,
                         rng_seed=1000 + seed,
                         params=ModelParams(geometry=cfg.geometry))
        hist = build_histogram(run_agent(spec, cfg))
        fit = fit_interference(hist, cfg.screen)
        assert 3.75 <= fit.lam <= 4.25
    assert time.perf_counter() - start < 120.0


def test_coherent_composition_peaks_match_two_slit_model():
    """Coherent sum of two dip curves puts fringe peaks on the two-slit model's."""
    g = Geometry()
    dip = ModelParams(geometry=g, interference_sign=-1, hd=8.0)
    xs = g.channel_xs()
    one_slit = curve_histogram(one_slit_dip_intensity(dip, xs, slit_x=0.0))
    composed = compose_coherent(one_slit, one_slit, dip,
                                shift=7, amplitude_factor=0.5)
    model_peaks = fringe_peak_channels(two_slit_intensity(ModelParams(geometry=g), xs))
    composed_peaks = fringe_peak_channels(composed.bins)
    assert model_peaks == [20, 32, 44]
    assert len(composed_peaks) == len(model_peaks)
    assert all(abs(a - b) <= 1 for a, b in zip(composed_peaks, model_peaks))


def test_mushroom_exclusion_keeps_histograms_clean():
    """10^4 attempts at M=20: constant field size, no excluded attempt counted."""
    cfg = WorldConfig(rng_seed=77)
    engine = Engine(cfg)
    dist = predicted_channel_distribution(ModelParams(geometry=cfg.geometry),
                                          cfg.screen)
    rng = random.Random(78)

    def field_stays_full(state, field, events, tick_index):
        assert field.count == 20

    attempts = []
    for _ in range(10_000):
        target = sample_channel(dist, rng)
        attempts.append(engine.run_attempt(make_controller(target, cfg),
                                           on_tick=field_stays_full))

    session = Session(id="exclusion", config=cfg, attempts=tuple(attempts))
    hist = build_histogram(session)
    kept = [a for a in attempts
            if a.outcome is Phase.REGISTERED and not a.excluded]
    assert any(a.excluded for a in attempts)
    assert hist.n_attempts_registered == len(kept)
    assert float(hist.bins.sum()) == float(len(kept))
    per_channel = Counter(a.channel for a in kept)
    assert all(hist.bins[c - 1] == per_channel.get(c, 0) for c in range(1, 64))


def test_persisted_sessions_replay_to_identical_histograms(tmp_path):
    """Simulate -> write -> replay gives bit-identical histograms, 100 seeds."""
    rng = random.Random(4242)
    for i in range(100):
        seed = rng.randrange(2 ** 32)
        cfg = WorldConfig(rng_seed=seed)
        spec = AgentSpec(kind="model-sampler", attempts=40,
                         rng_seed=seed ^ 0x5F5F,
                         params=ModelParams(geometry=cfg.geometry))
        session = run_agent(spec, cfg)
        path = tmp_path / f"s{i}.jsonl"
        write_session(session, path)
        fresh = replay(path)
        left, right = build_histogram(session), build_histogram(fresh)
        assert np.array_equal(left.bins, right.bins)
        assert left.n_attempts_registered == right.n_attempts_registered
