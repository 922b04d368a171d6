"""Independent ground truth for the solver.

Nothing here touches the adaptive truncation of :func:`kernel.eval_K` or the
fixed-point code. K is a plain sequential partial sum with an integral tail,
and zeros of D_n are counted by the argument principle: the phase of D_n is
tracked around a rectangle in steps of less than pi/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import BoundaryTooClose, DomainError, LostZero, NonIntegerWinding

PHASE_STEP_CAP = math.pi / 2
INTEGER_TOL = 0.2
BOUNDARY_THRESHOLD = 1e-13
MIN_EDGE_SAMPLES = 32
MAX_EDGE_DEPTH = 40
# Split fractions tried in turn when a bisection line grazes the zero.
SPLIT_FRACTIONS = (0.5, 0.53, 0.47, 0.59, 0.41, 0.67, 0.33)


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError("rectangle requires re_min < re_max and im_min < im_max")

    @property
    def center(self) -> complex:
        return complex((self.re_min + self.re_max) / 2, (self.im_min + self.im_max) / 2)

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    def corners(self):
        return (
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        )

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    def reflected(self) -> "Rectangle":
        return Rectangle(self.re_min, self.re_max, -self.im_max, -self.im_min)

    def split(self, axis: int, frac: float = 0.5):
        if axis == 0:
            cut = self.re_min + frac * (self.re_max - self.re_min)
            return (
                Rectangle(self.re_min, cut, self.im_min, self.im_max),
                Rectangle(cut, self.re_max, self.im_min, self.im_max),
            )
        cut = self.im_min + frac * (self.im_max - self.im_min)
        return (
            Rectangle(self.re_min, self.re_max, self.im_min, cut),
            Rectangle(self.re_min, self.re_max, cut, self.im_max),
        )

    def quarters(self):
        out = []
        for half in self.split(0):
            out.extend(half.split(1))
        return out


def solver_rectangle(z: complex, padding: float | None = None) -> Rectangle:
    """Box around a root: ``+-max(5, 3|Re z|)`` on both axes.

    The edge nearer the real axis is clipped to ``|Im z| / 2`` so the box never
    reaches the poles and real zeros of D_n.
    """
    z = complex(z)
    pad = max(5.0, 3.0 * abs(z.real)) if padding is None else padding
    if z.imag >= 0:
        lo, hi = max(z.imag - pad, z.imag / 2), z.imag + pad
    else:
        lo, hi = z.imag - pad, min(z.imag + pad, z.imag / 2)
    return Rectangle(z.real - pad, z.real + pad, lo, hi)


@lru_cache(maxsize=8)
def _powers(alpha: float, beta: float, terms: int):
    k = np.arange(1, terms + 1, dtype=float)
    return k**-alpha, k**beta


def brute_K(params, z, terms: int) -> complex:
    """Sequential partial sum of ``terms`` terms plus an integral tail.

    The tail is ``int_{N+1/2}^inf x**-alpha / (z + x**beta) dx`` (midpoint
    correction), evaluated in closed form as
    ``M**(1-alpha-beta) / (beta r) * 2F1(1, r; 1+r; -z / M**beta)``.
    """
    if terms < 1:
        raise DomainError("terms must be >= 1")
    z = complex(z)
    a, b = _powers(params.alpha, params.beta, int(terms))
    partial = complex(np.add.accumulate(a / (z + b))[-1])
    m = terms + 0.5
    r = params.r
    scale = m ** (1.0 - params.alpha - params.beta) / (params.beta * r)
    tail = scale * complex(special.hyp2f1(1.0, r, 1.0 + r, -z / m**params.beta))
    return partial + tail


def oracle_terms(params, rho: float) -> int:
    return max(2000, math.ceil((8.0 * max(rho, 1.0)) ** (1.0 / params.beta)))


def oracle_char_fn(problem, z, terms: int) -> complex:
    z = complex(z)
    n = problem.n
    return z * z / (n * n) + 1 - brute_K(problem.params, z, terms)


def _edge_phase(f, p: complex, q: complex, samples: int, cap: float, threshold: float):
    def value(t):
        v = f(p + (q - p) * t)
        if not abs(v) > threshold:
            raise BoundaryTooClose(f"|D_n| = {abs(v):.3g} at {p + (q - p) * t!r}")
        return v

    ts = np.linspace(0.0, 1.0, samples + 1)
    vals = [value(t) for t in ts]
    stack = [(ts[j], ts[j + 1], vals[j], vals[j + 1], 0) for j in range(samples)][::-1]
    total = 0.0
    while stack:
        t0, t1, v0, v1, depth = stack.pop()
        step = cmath.phase(v1 / v0)
        if abs(step) < cap:
            total += step
            continue
        if depth >= MAX_EDGE_DEPTH:
            raise NonIntegerWinding(f"phase step not resolved near {p + (q - p) * t0!r}")
        tm = 0.5 * (t0 + t1)
        vm = value(tm)
        stack.append((tm, t1, vm, v1, depth + 1))
        stack.append((t0, tm, v0, vm, depth + 1))
    return total


def winding_number(
    f,
    rect: Rectangle,
    samples: int = MIN_EDGE_SAMPLES,
    cap: float = PHASE_STEP_CAP,
    threshold: float = BOUNDARY_THRESHOLD,
) -> float:
    """Accumulated phase of ``f`` around ``rect`` (counter-clockwise) over 2 pi."""
    corners = rect.corners()
    total = sum(
        _edge_phase(f, corners[i], corners[(i + 1) % 4], samples, cap, threshold)
        for i in range(4)
    )
    return total / (2 * math.pi)


def count_zeros(problem, rect: Rectangle, samples: int = MIN_EDGE_SAMPLES) -> int:
    """Number of zeros of D_n inside ``rect`` (poles must lie outside)."""
    rho = max(abs(c) for c in rect.corners())
    terms = oracle_terms(problem.params, rho)
    wind = winding_number(lambda z: oracle_char_fn(problem, z, terms), rect, samples)
    nearest = round(wind)
    if abs(wind - nearest) > INTEGER_TOL:
        raise NonIntegerWinding(f"winding {wind:.4f} is not near an integer")
    return int(nearest)


def _try_count(problem, rect):
    try:
        return count_zeros(problem, rect)
    except (BoundaryTooClose, NonIntegerWinding):
        return None


def locate_zero(problem, rect: Rectangle, tol: float) -> complex:
    """Bisect ``rect`` (alternating axes) around its single zero until diameter < tol."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    if count_zeros(problem, rect) != 1:
        raise DomainError("locate_zero requires a rectangle holding exactly one zero")
    axis = 0 if rect.re_max - rect.re_min >= rect.im_max - rect.im_min else 1
    while rect.diameter >= tol:
        for frac in SPLIT_FRACTIONS:
            first, second = rect.split(axis, frac)
            c1 = _try_count(problem, first)
            if c1 == 1:
                rect = first
                break
            if c1 == 0 and _try_count(problem, second) == 1:
                rect = second
                break
        else:
            raise LostZero(f"no split of {rect} isolates the zero")
        axis ^= 1
    return rect.center


def isolate_zeros(problem, rect: Rectangle, max_depth: int = 6) -> list:
    """Sub-rectangles of ``rect`` each holding exactly one zero (quadtree search)."""
    found = []
    pending = [(rect, 0)]
    while pending:
        box, depth = pending.pop()
        count = _try_count(problem, box)
        if count == 1:
            found.append(box)
        elif count is None or count > 1:
            if depth < max_depth:
                pending.extend((q, depth + 1) for q in box.quarters())
    return sorted(found, key=lambda b: (b.re_min, b.im_min))
