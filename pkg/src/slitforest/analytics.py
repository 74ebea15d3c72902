"""Session statistics: histograms, ensembles, contrast, artifact flags,
wave-likeness, and the one-slit composition analyses."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .engine import Attempt, Phase, WorldConfig
from .physics import (
    ModelParams,
    Screen,
    one_slit_dip_intensity,
    predicted_channel_distribution,
)


class ContrastUndefinedError(ValueError):
    """The histogram has no central fringe structure to measure."""


class UnclassifiableHistogramError(ValueError):
    """Zero-variance histogram: correlation with any model is undefined."""


class InsufficientSessionsError(ValueError):
    """Ensemble statistics need at least two sessions."""


@dataclass(frozen=True)
class Session:
    """An ordered run of attempts by one subject or agent under one screen."""

    id: str
    config: WorldConfig
    attempts: tuple[Attempt, ...]
    subject: dict = dc_field(default_factory=dict)
    created_at: str = ""

    @property
    def screen(self) -> Screen:
        return self.config.screen


@dataclass(frozen=True, eq=False)
class ChannelHistogram:
    """Values over the registration channels.

    rate_k None means raw counts (integral bins summing to the registered
    count); otherwise bins are scaled to rate_k attempts for cross-session
    comparison.
    """

    bins: np.ndarray
    n_attempts_registered: int
    rate_k: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=float))
        if self.rate_k is None:
            if not np.allclose(self.bins, np.round(self.bins)):
                raise ValueError("counts-mode bins must be integers")
            if int(self.bins.sum()) != self.n_attempts_registered:
                raise ValueError("counts-mode bins must sum to the registered count")

    def __eq__(self, other):
        if not isinstance(other, ChannelHistogram):
            return NotImplemented
        return (
            np.array_equal(self.bins, other.bins)
            and self.n_attempts_registered == other.n_attempts_registered
            and self.rate_k == other.rate_k
        )

    @property
    def n_channels(self) -> int:
        return len(self.bins)

    def value(self, channel: int) -> float:
        return float(self.bins[channel - 1])

    def total(self) -> float:
        return float(self.bins.sum())


@dataclass(frozen=True)
class EnsembleStats:
    mean: np.ndarray
    sigma: np.ndarray
    n_sessions: int
    mean_sigma: float


def build_histogram(session: Session) -> ChannelHistogram:
    """Count registered, non-excluded attempts per channel."""
    n = session.config.geometry.n_channels
    bins = np.zeros(n)
    kept = 0
    for att in session.attempts:
        if att.excluded or att.outcome is not Phase.REGISTERED:
            continue
        bins[att.channel - 1] += 1
        kept += 1
    return ChannelHistogram(bins=bins, n_attempts_registered=kept)


def normalize(h: ChannelHistogram, k: float) -> ChannelHistogram:
    """Scale bins to a common per-k-attempts rate. Idempotent for equal k."""
    basis = h.n_attempts_registered if h.rate_k is None else h.rate_k
    if basis <= 0:
        raise ValueError("cannot normalize an empty histogram")
    scale = k / basis
    return ChannelHistogram(
        bins=h.bins * scale,
        n_attempts_registered=h.n_attempts_registered,
        rate_k=float(k),
    )


def curve_histogram(values, k: float = 1000.0) -> ChannelHistogram:
    """Wrap a model curve as a rate histogram with total mass k."""
    values = np.asarray(values, dtype=float)
    total = values.sum()
    if total <= 0:
        raise ValueError("curve has no mass to scale")
    return ChannelHistogram(bins=values * (k / total), n_attempts_registered=0, rate_k=float(k))


def _as_histogram(item) -> ChannelHistogram:
    if isinstance(item, ChannelHistogram):
        return item
    return build_histogram(item)


def ensemble_stats(sessions, k: float = 1000.0) -> EnsembleStats:
    """Per-channel mean and sample standard deviation over k-normalized
    session histograms, plus their average over the channels."""
    hists = [normalize(_as_histogram(s), k) for s in sessions]
    if len(hists) < 2:
        raise InsufficientSessionsError("ensemble statistics need at least 2 sessions")
    stack = np.stack([h.bins for h in hists])
    mean = stack.mean(axis=0)
    sigma = stack.std(axis=0, ddof=1)
    return EnsembleStats(mean=mean, sigma=sigma, n_sessions=len(hists),
                         mean_sigma=float(sigma.mean()))


def moving_average(values, width: int = 3) -> np.ndarray:
    """Centered moving average with reflected (edge-repeating) boundaries."""
    values = np.asarray(values, dtype=float)
    if width < 1 or width % 2 == 0:
        raise ValueError("smoothing width must be a positive odd integer")
    if width == 1:
        return values.copy()
    half = width // 2
    padded = np.pad(values, half, mode="symmetric")
    kernel = np.full(width, 1.0 / width)
    return np.convolve(padded, kernel, mode="valid")


def _strict_minima(values) -> list[int]:
    return [i for i in range(1, len(values) - 1)
            if values[i] < values[i - 1] and values[i] < values[i + 1]]


def _strict_maxima(values) -> list[int]:
    return [i for i in range(1, len(values) - 1)
            if values[i] > values[i - 1] and values[i] > values[i + 1]]


def contrast(h: ChannelHistogram, smoothing_width: int = 3,
             central_halfwidth: int = 14) -> float:
    """Fringe contrast (peak - adjacent minima mean) / (peak + that mean).

    The peak is the largest strict local maximum of the smoothed curve
    within the central region; its nearest strict local minima on each side
    supply the reference level. Raises ContrastUndefinedError when that
    structure does not exist (flat or monotone histograms, or a central
    bump lower than its surroundings).
    """
    if h.total() <= 0:
        raise ValueError("contrast of an empty histogram")
    sm = moving_average(h.bins, smoothing_width)
    center = (h.n_channels + 1) // 2
    lo = max(1, center - central_halfwidth) - 1
    hi = min(h.n_channels, center + central_halfwidth) - 1
    maxima = [i for i in _strict_maxima(sm) if lo <= i <= hi]
    if not maxima:
        raise ContrastUndefinedError("no interior maximum in the central region")
    peak_i = max(maxima, key=lambda i: (sm[i], -i))
    minima = _strict_minima(sm)
    left = [i for i in minima if i < peak_i]
    right = [i for i in minima if i > peak_i]
    if not left or not right:
        raise ContrastUndefinedError("no interior minima flanking the central peak")
    ref = (sm[left[-1]] + sm[right[0]]) / 2.0
    peak = sm[peak_i]
    if ref > peak:
        raise ContrastUndefinedError("central peak sits below its flanking minima")
    return float((peak - ref) / (peak + ref))


def slit_channels(screen: Screen, d: float = 14.0, n_channels: int = 63) -> tuple[int, ...]:
    center = (n_channels + 1) // 2
    return tuple(round(c) + center for c in screen.slit_centers(d))


def flag_artifact_channels(h: ChannelHistogram, screen: Screen, d: float = 14.0,
                           factor: float = 1.5) -> set[int]:
    """Slit-aligned channels whose value towers over their neighbors' mean.

    Uncontrolled straight flights through a slit pile up in exactly these
    channels, so only they are inspected.
    """
    flagged = set()
    for ch in slit_channels(screen, d, h.n_channels):
        if not 1 <= ch <= h.n_channels:
            continue
        neighbors = [h.value(c) for c in (ch - 1, ch + 1) if 1 <= c <= h.n_channels]
        if not neighbors:
            continue
        if h.value(ch) > factor * (sum(neighbors) / len(neighbors)):
            flagged.add(ch)
    return flagged


def mask_interpolate(values, channels) -> np.ndarray:
    """Replace the given channels by linear interpolation of their unmasked
    neighbors (channel indices are 1-based)."""
    values = np.asarray(values, dtype=float).copy()
    if not channels:
        return values
    idx = np.arange(len(values))
    masked = np.zeros(len(values), dtype=bool)
    for ch in channels:
        masked[ch - 1] = True
    if masked.all():
        raise ValueError("cannot mask every channel")
    values[masked] = np.interp(idx[masked], idx[~masked], values[~masked])
    return values


@dataclass(frozen=True)
class WaveClassification:
    score: float
    wave_like: bool


def classify_wave_like(h: ChannelHistogram, params: ModelParams, screen: Screen,
                       mask=(), threshold: float = 0.3,
                       smoothing_width: int = 3) -> WaveClassification:
    """Pearson correlation of the (masked, smoothed) histogram against the
    model curve; wave-like when the score clears the threshold."""
    data = mask_interpolate(h.bins, mask)
    data = moving_average(data, smoothing_width)
    model = predicted_channel_distribution(params, screen)
    if np.std(data) == 0.0 or np.std(model) == 0.0:
        raise UnclassifiableHistogramError("zero-variance input")
    score = float(np.corrcoef(data, model)[0, 1])
    return WaveClassification(score=score, wave_like=score >= threshold)


def _check_composable(h_left: ChannelHistogram, h_right: ChannelHistogram):
    if h_left.rate_k is None or h_left.rate_k != h_right.rate_k:
        raise ValueError("composition inputs must be normalized to a common k")
    if len(h_left.bins) != len(h_right.bins):
        raise ValueError("composition inputs must share the channel grid")


def _shifted(bins: np.ndarray, by: int) -> np.ndarray:
    """out[c] = bins[c + by] with out-of-range contributions zero."""
    n = len(bins)
    out = np.zeros(n)
    src_lo, src_hi = max(0, by), min(n, n + by)
    out[src_lo - by:src_hi - by] = bins[src_lo:src_hi]
    return out


def compose_incoherent(h_left: ChannelHistogram, h_right: ChannelHistogram,
                       shift: int = 7) -> ChannelHistogram:
    """Sum of the two one-slit histograms displaced to -shift and +shift."""
    _check_composable(h_left, h_right)
    bins = _shifted(h_left.bins, +shift) + _shifted(h_right.bins, -shift)
    return ChannelHistogram(
        bins=bins,
        n_attempts_registered=h_left.n_attempts_registered + h_right.n_attempts_registered,
        rate_k=h_left.rate_k,
    )


def compose_coherent(h_left: ChannelHistogram, h_right: ChannelHistogram,
                     p: ModelParams, shift: int = 7, amplitude_factor: float = 0.5,
                     cross_scale: float = 1.0) -> ChannelHistogram:
    """Interfere the displaced one-slit histograms as if they were the two
    envelope intensities, with path lengths taken from slit centers at
    -shift and +shift. cross_scale 0 silences the interference member, which
    must then reproduce amplitude_factor times the incoherent sum."""
    _check_composable(h_left, h_right)
    ea = _shifted(h_left.bins, +shift)
    eb = _shifted(h_right.bins, -shift)
    if (ea < 0).any() or (eb < 0).any():
        raise ValueError("composition inputs must be nonnegative intensities")
    g = p.geometry
    xs = g.channel_xs()
    ra = np.sqrt(g.D ** 2 + (xs + shift) ** 2)
    rb = np.sqrt(g.D ** 2 + (xs - shift) ** 2)
    cross = 2.0 * np.sqrt(ea * eb) * np.cos(2.0 * np.pi * (ra - rb) / g.lam) * cross_scale
    bins = amplitude_factor * (ea + eb + cross)
    return ChannelHistogram(
        bins=bins,
        n_attempts_registered=h_left.n_attempts_registered + h_right.n_attempts_registered,
        rate_k=h_left.rate_k,
    )


def compose_from_approximation(p: ModelParams, C: float = 10.0, shift: int = 7,
                               amplitude_factor: float = 0.5, mode: str = "coherent",
                               k: float = 1000.0) -> ChannelHistogram:
    """Composition fed by the dip-model approximation raised by a constant C
    instead of experimental one-slit data."""
    if p.interference_sign != -1:
        raise ValueError("approximation composition needs the dip model")
    xs = p.geometry.channel_xs()
    values = one_slit_dip_intensity(p, xs, slit_x=0.0) + C
    if (values < 0).any():
        raise ValueError("offset C makes the approximation negative")
    h = curve_histogram(values, k)
    if mode == "incoherent":
        return compose_incoherent(h, h, shift)
    if mode == "coherent":
        return compose_coherent(h, h, p, shift, amplitude_factor)
    raise ValueError(f"unknown composition mode {mode!r}")


def fringe_peak_channels(values, smoothing_width: int = 3,
                         central_halfwidth: int = 14) -> list[int]:
    """Strict local maxima of the smoothed curve within the central region,
    as 1-based channels. The fringe positions the composition analyses and
    acceptance checks compare."""
    sm = moving_average(values, smoothing_width)
    n = len(sm)
    center = (n + 1) // 2
    lo = max(1, center - central_halfwidth) - 1
    hi = min(n, center + central_halfwidth) - 1
    return [i + 1 for i in _strict_maxima(sm) if lo <= i <= hi]
