"""Closed-form predictions for the complex spectrum and remainder fits.

For ``r < 1`` the root near ``+in`` is predicted as

    z_n ~ i n + C exp(-i (r+1) pi / 2) n**(1-r)

with ``C = c_r`` (the constant as stated for the theorem) or ``C = c_r / 2``
(what the first fixed-point iterate ``-(i n / 2) K(i n)`` gives once K is
replaced by its leading term). For ``r == 1`` both variants give
``z_n ~ i n - log(n) / (2 beta)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientData
from .kernel import KernelParams

VARIANTS = ("as_stated", "half")
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class Prediction:
    n: int
    branch: str
    leading: complex
    correction: complex
    constant_variant: str
    predicted_z: complex


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise DomainError(f"unknown constant variant {variant!r}; expected one of {VARIANTS}")


def rotation(r: float) -> complex:
    """Unit factor ``exp(-i (r+1) pi / 2)`` of the r < 1 correction."""
    return cmath.exp(-1j * (r + 1.0) * math.pi / 2.0)


def predict(params: KernelParams, n: int, variant: str = "as_stated") -> Prediction:
    _check_variant(variant)
    if params.r > 1:
        raise DomainError("predictions require r <= 1")
    if n < 1:
        raise DomainError("mode index n must be >= 1")
    leading = complex(0.0, n)
    if params.log_branch:
        branch = "r_equal_1"
        correction = complex(-math.log(n) / (2.0 * params.beta), 0.0)
    else:
        branch = "r_less_1"
        constant = params.c_r if variant == "as_stated" else params.c_r / 2.0
        correction = constant * rotation(params.r) * n ** (1.0 - params.r)
    return Prediction(n, branch, leading, correction, variant, leading + correction)


@dataclass(frozen=True)
class FitReport:
    """Remainder-order fit of ``|z_n - predicted_z(n)|`` against n.

    ``slope``/``intercept`` come from least squares of log deviation on log n
    over the largest-n half of the data (``None`` when degenerate). The leading
    constant is estimated from the per-mode quotients ``constant_per_n``; its
    stability is the relative spread of their moduli over the last decade of n.
    For ``r == 1`` the offsets ``Re z_n + log(n)/(2 beta)`` are also summarised.
    """

    variant: str
    r: float
    n_values: tuple
    deviations: tuple
    fit_from_n: int
    slope: Optional[float]
    intercept: Optional[float]
    degenerate: bool
    median_deviation: float
    constant: complex
    constant_per_n: tuple
    constant_spread: float
    constant_ratio: Optional[float]
    nearer: Optional[str]
    offset_max: Optional[float] = None
    first_decade_drift: Optional[float] = None
    last_decade_drift: Optional[float] = None

    def to_dict(self) -> dict:
        def cx(v):
            return [v.real, v.imag]

        return {
            "variant": self.variant,
            "r": self.r,
            "fit_from_n": self.fit_from_n,
            "slope": self.slope,
            "intercept": self.intercept,
            "degenerate": self.degenerate,
            "median_deviation": self.median_deviation,
            "constant": cx(self.constant),
            "constant_spread": self.constant_spread,
            "constant_ratio": self.constant_ratio,
            "nearer": self.nearer,
            "offset_max": self.offset_max,
            "first_decade_drift": self.first_decade_drift,
            "last_decade_drift": self.last_decade_drift,
            "points": [
                {"n": n, "deviation": d, "constant": cx(c)}
                for n, d, c in zip(self.n_values, self.deviations, self.constant_per_n)
            ],
        }


def _ptp(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(values.max() - values.min()) if values.size else float("nan")


def fit_remainder(points: Sequence, params: KernelParams, variant: str = "as_stated") -> FitReport:
    """Fit remainder order and leading constant from computed spectrum points.

    ``points`` only need ``n`` and ``z`` attributes.
    """
    _check_variant(variant)
    pts = sorted(points, key=lambda p: p.n)
    if len(pts) < MIN_FIT_POINTS:
        raise InsufficientData(f"need at least {MIN_FIT_POINTS} points, got {len(pts)}")
    ns = np.array([p.n for p in pts], dtype=float)
    if ns[-1] < 10 * ns[0]:
        raise InsufficientData("points must span at least one decade in n")
    zs = np.array([complex(p.z) for p in pts])
    predicted = np.array([predict(params, int(n), variant).predicted_z for n in ns])
    dev = np.abs(zs - predicted)

    half = len(pts) // 2
    fit_n, fit_dev = ns[half:], dev[half:]
    degenerate = bool(np.any(fit_dev <= 0) or np.ptp(np.log(fit_n)) == 0)
    slope = intercept = None
    if not degenerate:
        slope, intercept = (float(c) for c in np.polyfit(np.log(fit_n), np.log(fit_dev), 1))

    last = ns >= ns[-1] / 10.0
    first = ns <= ns[0] * 10.0
    offset_max = first_drift = last_drift = None
    if params.log_branch:
        usable = ns >= 2
        quotient = np.full(len(ns), np.nan, dtype=complex)
        quotient[usable] = zs.real[usable] / (-np.log(ns[usable]) / (2.0 * params.beta))
        pick = last & usable
        constant = complex(np.mean(quotient[pick]))
        ratio = constant.real
        nearer = None
        offsets = zs.real + np.log(ns) / (2.0 * params.beta)
        offset_max = float(np.max(np.abs(offsets)))
        first_drift = _ptp(offsets[first])
        last_drift = _ptp(offsets[last])
    else:
        quotient = (zs - 1j * ns) / (rotation(params.r) * ns ** (1.0 - params.r))
        pick = last
        constant = complex(np.mean(quotient[pick]))
        ratio = abs(constant) / params.c_r
        nearer = "c_r/2" if abs(ratio - 0.5) < abs(ratio - 1.0) else "c_r"
    mods = np.abs(quotient[pick])
    spread = float((mods.max() - mods.min()) / abs(constant)) if abs(constant) > 0 else math.inf

    return FitReport(
        variant=variant,
        r=params.r,
        n_values=tuple(int(n) for n in ns),
        deviations=tuple(float(d) for d in dev),
        fit_from_n=int(fit_n[0]),
        slope=slope,
        intercept=intercept,
        degenerate=degenerate,
        median_deviation=float(np.median(fit_dev)),
        constant=constant,
        constant_per_n=tuple(complex(q) for q in quotient),
        constant_spread=spread,
        constant_ratio=float(ratio),
        nearer=nearer,
        offset_max=offset_max,
        first_decade_drift=first_drift,
        last_decade_drift=last_drift,
    )
