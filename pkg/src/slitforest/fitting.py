"""Wavelength and distance estimation from channel histograms.

The residual surface is multimodal in the wavelength (neighbouring fringe
spacings alias), so the estimator grid-searches a bounded physical range and
then refines around the best cell instead of running a gradient method.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analytics import ChannelHistogram, moving_average
from .physics import Geometry, ModelParams, Screen, predicted_channel_distribution


class FlatDataError(ValueError):
    """The histogram carries no structure a fringe model could explain."""


DEFAULT_LAMBDA_BOUNDS = (1.0, 20.0)
DEFAULT_D_BOUNDS = (10.0, 80.0)
LAMBDA_STEP = 0.1
D_STEP = 1.0
REFINE_FACTOR = 10


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters and the goodness of fit that selected them."""

    lam: float
    D: float
    d: float
    scale: float
    residual: float
    minima_count: int
    mask: tuple[int, ...]
    screen: Screen
    free: tuple[str, ...]
    geometry: Geometry

    @property
    def params(self) -> ModelParams:
        g = replace(self.geometry, lam=self.lam, D=self.D, d=self.d)
        sign = +1 if self.screen.is_two_slit else -1
        return ModelParams(geometry=g, interference_sign=sign)

    def curve(self) -> np.ndarray:
        """Fitted model scaled back to the histogram's own units."""
        return self.scale * predicted_channel_distribution(self.params, self.screen)


def _values_of(data) -> np.ndarray:
    if isinstance(data, ChannelHistogram):
        return np.asarray(data.bins, dtype=float)
    return np.asarray(data, dtype=float)


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(round((hi - lo) / step))
    points = [round(lo + i * step, 9) for i in range(n + 1)]
    return [p for p in points if lo - 1e-12 <= p <= hi + 1e-12]


def _prediction(lam: float, dist: float, screen: Screen, base: Geometry) -> np.ndarray:
    g = replace(base, lam=lam, D=dist,
                slit_centers=tuple(screen.slit_centers(base.d)))
    sign = +1 if screen.is_two_slit else -1
    # hd is left at its default so the dip family keeps hd tied to 2*lambda
    return predicted_channel_distribution(
        ModelParams(geometry=g, interference_sign=sign), screen)


def fit_interference(h: ChannelHistogram, screen: Screen,
                     free: tuple[str, ...] = ("lambda",),
                     bounds: dict | None = None,
                     mask: tuple[int, ...] = (),
                     geometry: Geometry = Geometry()) -> FitResult:
    """Grid-search-plus-refine least squares over the screen's model family.

    Residuals compare probability-normalized vectors so attempt counts
    cancel; channels listed in mask are dropped from the residual sum.
    The slit separation d always stays fixed at the geometry's value.
    """
    for name in free:
        if name not in ("lambda", "D"):
            raise ValueError(f"unknown free parameter {name!r}")
    bounds = dict(bounds or {})
    lam_lo, lam_hi = bounds.get("lambda", DEFAULT_LAMBDA_BOUNDS)
    d_lo, d_hi = bounds.get("D", DEFAULT_D_BOUNDS)
    if lam_lo > lam_hi or d_lo > d_hi:
        raise ValueError("empty search bounds")

    raw = _values_of(h)
    n = raw.size
    keep = np.ones(n, dtype=bool)
    for ch in mask:
        if not 1 <= ch <= n:
            raise ValueError(f"masked channel {ch} outside 1..{n}")
        keep[ch - 1] = False
    if not keep.any():
        raise ValueError("every channel is masked")

    total = float(raw.sum())
    if total <= 0.0:
        raise FlatDataError("histogram has no mass")
    target = raw / total
    if np.ptp(target[keep]) == 0.0:
        raise FlatDataError("histogram is flat over the unmasked channels")

    lam_values = _grid(lam_lo, lam_hi, LAMBDA_STEP)
    if "D" in free:
        d_values = _grid(d_lo, d_hi, D_STEP)
    else:
        d_values = [geometry.D]

    def residual_at(lam: float, dist: float) -> float:
        pred = _prediction(lam, dist, screen, geometry)
        diff = target[keep] - pred[keep]
        return float(diff @ diff)

    def search(lams, dists, best):
        for lam in lams:
            for dist in dists:
                key = (residual_at(lam, dist), lam, dist)
                if best is None or key < best:
                    best = key
        return best

    best = search(lam_values, d_values, None)

    # refine one coarse cell around the winner at ten times the resolution
    lam_fine = _grid(max(lam_lo, best[1] - LAMBDA_STEP),
                     min(lam_hi, best[1] + LAMBDA_STEP),
                     LAMBDA_STEP / REFINE_FACTOR)
    if "D" in free:
        d_fine = _grid(max(d_lo, best[2] - D_STEP),
                       min(d_hi, best[2] + D_STEP),
                       D_STEP / REFINE_FACTOR)
    else:
        d_fine = d_values
    best = search(lam_fine, d_fine, best)

    residual, lam, dist = best
    pred = _prediction(lam, dist, screen, geometry)
    denom = float(pred[keep] @ pred[keep])
    scale = float(raw[keep] @ pred[keep]) / denom

    return FitResult(
        lam=lam,
        D=dist,
        d=geometry.d,
        scale=scale,
        residual=residual,
        minima_count=count_minima(raw),
        mask=tuple(sorted(mask)),
        screen=screen,
        free=tuple(free),
        geometry=geometry,
    )


def count_minima(data, smoothing_width: int = 3) -> int:
    """Strict interior local minima of the smoothed curve."""
    values = _values_of(data)
    if values.size < 5:
        raise ValueError("need at least 5 points to count minima")
    sm = moving_average(values, smoothing_width)
    interior = (sm[1:-1] < sm[:-2]) & (sm[1:-1] < sm[2:])
    return int(np.count_nonzero(interior))


def lambda_bound_from_minima(d: float, observed: int) -> float:
    """Largest wavelength consistent with seeing the given number of minima."""
    if d <= 0:
        raise ValueError("d must be positive")
    if observed < 1:
        raise ValueError("no minima observed: the wavelength is unbounded")
    return 2.0 * d / observed
