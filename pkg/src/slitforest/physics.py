"""Closed-form intensity and amplitude models over the registration channels.

Two families: the two-slit interference curve (positive cross term) and the
one-slit dip curve (negative cross term, two hidden sources inside the slit).
All functions accept scalars or numpy arrays for the lateral coordinate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class DegenerateDistributionError(ValueError):
    """Raised when a model evaluates to all zeros and cannot be normalized."""


class Screen(enum.Enum):
    TWO_SLIT = "two-slit"
    ONE_SLIT_LEFT = "one-slit-left"
    ONE_SLIT_CENTER = "one-slit-center"
    ONE_SLIT_RIGHT = "one-slit-right"

    def slit_centers(self, d: float) -> tuple[float, ...]:
        half = d / 2.0
        if self is Screen.TWO_SLIT:
            return (-half, +half)
        if self is Screen.ONE_SLIT_LEFT:
            return (-half,)
        if self is Screen.ONE_SLIT_RIGHT:
            return (+half,)
        return (0.0,)

    @property
    def is_two_slit(self) -> bool:
        return self is Screen.TWO_SLIT


def center_channel(n_channels: int) -> int:
    return (n_channels + 1) // 2


def x_for_channel(channel: int, n_channels: int = 63) -> float:
    """Lateral coordinate of a channel's bin center (channel 32 -> 0.0)."""
    return float(channel - (n_channels + 1) / 2)


def channel_for_x(x: float, n_channels: int = 63) -> int:
    """Nearest registration channel for a lateral coordinate. May fall outside 1..n."""
    return round(x) + (n_channels + 1) // 2


@dataclass(frozen=True)
class Geometry:
    """Spatial parameters of the apparatus, all in channel units."""

    t: float = 0.5     # screen thickness
    w: float = 2.0     # slit width
    lam: float = 4.0   # wavelength
    d: float = 14.0    # slit separation
    D: float = 40.0    # screen to registration plane
    s: float = 100.0   # source to screen
    n_channels: int = 63
    slit_centers: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.slit_centers:
            object.__setattr__(self, "slit_centers", (-self.d / 2.0, +self.d / 2.0))

    def channel_xs(self) -> np.ndarray:
        return np.arange(1, self.n_channels + 1) - (self.n_channels + 1) / 2.0


def validate_geometry(g: Geometry) -> list[str]:
    """Return the list of violated ordering constraints, empty when valid.

    Non-positive fields are rejected outright since the ordering chain is
    meaningless for them.
    """
    for name in ("t", "w", "lam", "d", "D", "s"):
        if getattr(g, name) <= 0:
            raise ValueError(f"geometry field {name} must be positive")
    if g.n_channels < 1:
        raise ValueError("geometry field n_channels must be positive")
    chain = [("t", g.t), ("w", g.w), ("lam", g.lam), ("d", g.d), ("D", g.D), ("s", g.s)]
    violations = []
    for (na, va), (nb, vb) in zip(chain, chain[1:]):
        if not va < vb:
            label_a = "lambda" if na == "lam" else na
            label_b = "lambda" if nb == "lam" else nb
            violations.append(f"{label_a} < {label_b} fails")
    return violations


@dataclass(frozen=True)
class ModelParams:
    """Parameters selecting and scaling one of the two intensity families.

    interference_sign +1 is the two-slit curve, -1 the one-slit dip with two
    hidden sources at slit_x +- hd/2. hd defaults to twice the wavelength.
    amplitude_scale and baseline_offset only matter for display and
    composition; normalized distributions are invariant to them.
    """

    geometry: Geometry = field(default_factory=Geometry)
    hd: float | None = None
    interference_sign: int = +1
    amplitude_scale: float = 1.0
    baseline_offset: float = 0.0

    def __post_init__(self):
        if self.hd is None:
            object.__setattr__(self, "hd", 2.0 * self.geometry.lam)
        if self.interference_sign not in (+1, -1):
            raise ValueError("interference_sign must be +1 or -1")
        if self.interference_sign == -1 and self.hd <= 0:
            raise ValueError("hd must be positive for the dip model")
        if self.amplitude_scale <= 0:
            raise ValueError("amplitude_scale must be positive")

    def with_slits(self, centers: tuple[float, ...]) -> "ModelParams":
        return replace(self, geometry=replace(self.geometry, slit_centers=centers))


def envelope_intensity(g: Geometry, slit_x: float, x):
    """Single-source intensity factor D^2 / r^3 with r = sqrt(D^2 + (x - slit_x)^2)."""
    dx = np.asarray(x, dtype=float) - slit_x
    r = np.sqrt(g.D * g.D + dx * dx)
    out = g.D * g.D / (r * r * r)
    return float(out) if np.isscalar(x) else out


def complex_amplitude(g: Geometry, slit_x: float, x):
    """Wave amplitude D / r^(3/2) * exp(-i 2 pi r / lambda); |F|^2 is the envelope."""
    if g.lam <= 0:
        raise ValueError("lambda must be positive")
    dx = np.asarray(x, dtype=float) - slit_x
    r = np.sqrt(g.D * g.D + dx * dx)
    out = (g.D / r ** 1.5) * np.exp(-2j * np.pi * r / g.lam)
    return complex(out) if np.isscalar(x) else out


def two_slit_intensity(p: ModelParams, x):
    """Interference intensity E_a + E_b + 2 sqrt(E_a E_b) cos(2 pi (r_a - r_b) / lambda)."""
    if p.interference_sign != +1:
        raise ValueError("two_slit_intensity requires interference_sign +1")
    g = p.geometry
    if len(g.slit_centers) != 2:
        raise ValueError("two_slit_intensity requires exactly two slit centers")
    sa, sb = g.slit_centers
    xa = np.asarray(x, dtype=float)
    ra = np.sqrt(g.D * g.D + (xa - sa) ** 2)
    rb = np.sqrt(g.D * g.D + (xa - sb) ** 2)
    ea = g.D * g.D / ra ** 3
    eb = g.D * g.D / rb ** 3
    out = ea + eb + 2.0 * np.sqrt(ea * eb) * np.cos(2.0 * np.pi * (ra - rb) / g.lam)
    out = p.amplitude_scale * out
    return float(out) if np.isscalar(x) else out


def one_slit_dip_intensity(p: ModelParams, x, slit_x: float | None = None):
    """Dip intensity: Eq-style sum with the interference member's sign flipped.

    Evaluated as (sqrt(E_a) - sqrt(E_b))^2 + 2 sqrt(E_a E_b) (1 - cos theta),
    which is the same expression regrouped so the center evaluates to an
    exact floating-point zero rather than a cancellation residue.
    """
    g = p.geometry
    if slit_x is None:
        if len(g.slit_centers) != 1:
            raise ValueError("one_slit_dip_intensity requires exactly one slit center")
        slit_x = g.slit_centers[0]
    if p.hd <= 0:
        raise ValueError("hd must be positive")
    half = p.hd / 2.0
    # offset from the slit center first: x == slit_x then yields bitwise
    # symmetric source distances and an exact 0.0 at the dip bottom
    u = np.asarray(x, dtype=float) - slit_x
    ra = np.sqrt(g.D * g.D + (u + half) ** 2)
    rb = np.sqrt(g.D * g.D + (u - half) ** 2)
    fa = g.D / ra ** 1.5
    fb = g.D / rb ** 1.5
    theta = 2.0 * np.pi * (ra - rb) / g.lam
    out = (fa - fb) ** 2 + 2.0 * fa * fb * (1.0 - np.cos(theta))
    out = p.amplitude_scale * out
    return float(out) if np.isscalar(x) else out


def model_intensity(p: ModelParams, x):
    if p.interference_sign == +1:
        return two_slit_intensity(p, x)
    return one_slit_dip_intensity(p, x)


def predicted_channel_distribution(p: ModelParams, screen: Screen) -> np.ndarray:
    """Probability of registration per channel under the screen's model family.

    The screen decides family and slit placement: two-slit uses the
    interference curve over centers +-d/2, one-slit uses the dip curve at
    that slit's center. Returned vector indexes channel c at position c-1.
    """
    g = p.geometry
    xs = g.channel_xs()
    if screen.is_two_slit:
        if p.interference_sign != +1:
            raise ValueError("two-slit screen needs a +1 interference_sign model")
        values = two_slit_intensity(p.with_slits(screen.slit_centers(g.d)), xs)
    else:
        if p.interference_sign != -1:
            raise ValueError("one-slit screen needs a -1 interference_sign model")
        (center,) = screen.slit_centers(g.d)
        values = one_slit_dip_intensity(p, xs, slit_x=center)
    total = float(np.sum(values))
    if total <= 0.0:
        raise DegenerateDistributionError("model intensity sums to zero over the channel grid")
    return values / total


def fringe_count(d: float, lam: float) -> float:
    """Predicted number of interference minima, N = 2 d / lambda (independent of D)."""
    if d <= 0 or lam <= 0:
        raise ValueError("d and lambda must be positive")
    return 2.0 * d / lam


def lambda_from_minima(d: float, n: float) -> float:
    """Wavelength implied by an observed minima count, lambda = 2 d / N."""
    if d <= 0 or n <= 0:
        raise ValueError("d and N must be positive")
    return 2.0 * d / n
