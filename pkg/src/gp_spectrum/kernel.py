"""Laplace transform of the model relaxation kernel.

The kernel is ``k(t) = sum_k k**-alpha * exp(-k**beta * t)``, so its transform is
the meromorphic function

    K(z) = sum_{k>=1} k**-alpha / (z + k**beta)

with simple poles at ``-k**beta``. This module evaluates K, K' and the integral
surrogate ``h(z) = int_1^inf dx / (x**alpha (z + x**beta))`` with certified
truncation bounds, plus the closed-form large-|z| approximations.

All public evaluators are computed for ``Im z >= 0`` and reflected for the lower
half-plane, so ``f(conj z) == conj(f(z))`` holds bit-for-bit.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import (
    DomainError,
    PoleProximity,
    QuadratureFailure,
    SectorViolation,
    ToleranceUnreachable,
)

EPS = float(np.finfo(float).eps)

DEFAULT_TOL = 1e-12
DEFAULT_DELTA = math.pi / 6
# Rays closer than this to the negative axis are refused outright.
MIN_DELTA = 1e-2
# Absorbs the rounding in ``pi - delta`` so rays at exactly +-(pi - delta) pass.
SECTOR_SLACK = 1e-12

TERM_BUDGET = 10**8
MIN_TERMS = 32
HEAD_FACTOR = 10.0
MAX_TAIL_TERMS = 64
POLE_EXCLUSION = 10.0
_CACHE_LIMIT = 1 << 20
_CHUNK = 1 << 20


@dataclass(frozen=True)
class KernelParams:
    """Exponents of the model kernel ``a_k = k**-alpha``, ``b_k = k**beta``.

    ``r = (alpha + beta - 1) / beta`` is the decay order of K and ``c_r`` the
    constant of its leading term ``c_r * z**-r`` (``None`` on the logarithmic
    branch ``r == 1``).
    """

    alpha: float
    beta: float
    r: float = field(init=False)
    c_r: Optional[float] = field(init=False)

    def __post_init__(self):
        alpha, beta = float(self.alpha), float(self.beta)
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise DomainError("alpha and beta must be finite")
        if alpha <= 0:
            raise DomainError("requires alpha > 0")
        if beta <= 0:
            raise DomainError("requires beta > 0")
        if alpha > 1:
            raise DomainError("requires alpha <= 1 (sum of a_k must diverge)")
        if alpha + beta <= 1:
            raise DomainError("requires alpha + beta > 1 (sum of a_k/b_k must converge)")
        if alpha == 1.0:
            r = 1.0
        else:
            r = min((alpha + beta - 1.0) / beta, math.nextafter(1.0, 0.0))
        c_r = None if r == 1.0 else math.pi / (beta * math.sin(math.pi * r))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "c_r", c_r)

    @property
    def log_branch(self) -> bool:
        return self.r == 1.0


@dataclass(frozen=True)
class KernelEval:
    """A computed value with its truncation bound.

    ``error_bound`` covers truncation only; floating-point rounding is not
    included. ``terms_used`` counts the explicitly summed terms and
    ``tail_terms`` the terms of the tail expansion (or quadrature pieces).
    """

    value: complex
    error_bound: float
    terms_used: int
    tail_terms: int = 0


@dataclass(frozen=True)
class SectorSpec:
    """Region ``|arg z| <= pi - delta``, ``rho_min <= |z| <= rho_max``."""

    delta: float = DEFAULT_DELTA
    rho_min: float = 10.0
    rho_max: float = 1e4

    def __post_init__(self):
        if not 0 < self.delta < math.pi:
            raise DomainError("sector delta must lie in (0, pi)")
        if not 0 < self.rho_min < self.rho_max:
            raise DomainError("sector requires 0 < rho_min < rho_max")

    def require_usable(self):
        if self.delta < MIN_DELTA:
            raise SectorViolation(
                f"sector margin delta={self.delta:g} is below the minimum {MIN_DELTA:g}"
            )

    def rays(self) -> list[float]:
        edge = math.pi - self.delta
        return [-edge, -math.pi / 4, 0.0, math.pi / 4, edge]

    def moduli(self, per_decade: int = 4) -> list[float]:
        decades = math.log10(self.rho_max / self.rho_min)
        count = max(2, int(round(decades * per_decade)) + 1)
        return [float(x) for x in np.geomspace(self.rho_min, self.rho_max, count)]


def in_sector(z: complex, delta: float = DEFAULT_DELTA) -> bool:
    return abs(cmath.phase(z)) <= math.pi - delta + SECTOR_SLACK


def upper_half(z):
    """Map z to the closed upper half-plane; report whether it was reflected."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    if math.copysign(1.0, z.imag) < 0:
        return z.conjugate(), True
    return z, False


def _finite(value: complex, what: str) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise DomainError(f"{what} is not finite")
    return value


def _check_pole(params: KernelParams, z: complex):
    if z.real >= 0:
        return
    guard = POLE_EXCLUSION * EPS * max(1.0, abs(z))
    if abs(z.imag) > guard:
        return
    x = (-z.real) ** (1.0 / params.beta)
    for k in (math.floor(x), math.floor(x) + 1):
        if k >= 1 and abs(z + k**params.beta) <= guard:
            raise PoleProximity(f"z={z!r} lies within {guard:.3g} of the pole -{k}**beta")


@lru_cache(maxsize=16)
def _head_arrays(alpha: float, beta: float, size: int):
    """Coefficients and rates for ``k = 1 .. size``; sliced by callers."""
    k = np.arange(1, size + 1, dtype=float)
    a = k**-alpha
    b = k if beta == 1.0 else k**beta
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


def _head_sum(params: KernelParams, z: complex, n: int, order: int) -> complex:
    """Sum of ``k**-alpha / (z + k**beta)**(order+1)`` for ``1 <= k < n``."""
    count = n - 1
    if count <= _CACHE_LIMIT:
        size = max(MIN_TERMS, 1 << (count - 1).bit_length())
        a, b = _head_arrays(params.alpha, params.beta, size)
        chunks = [(a[:count], b[:count])]
    else:
        chunks = _chunked(params, count)
    total = 0j
    for a, b in chunks:
        denom = z + b
        if order:
            denom = denom * denom
        total += complex(np.sum(a / denom))
    return total


def _chunked(params: KernelParams, count: int):
    for start in range(1, count + 1, _CHUNK):
        k = np.arange(start, min(count + 1, start + _CHUNK), dtype=float)
        yield k**-params.alpha, (k if params.beta == 1.0 else k**params.beta)


def _tail_sum(params: KernelParams, z: complex, n: int, order: int, target: float):
    """Tail ``sum_{k>=n}`` expanded as ``sum_m c_m (-z)**m zeta(s_m, n)``.

    Returns ``(value, bound, terms)``; ``bound`` is infinite when the expansion
    diverges (``|z| >= n**beta``).
    """
    alpha, beta = params.alpha, params.beta
    rho = abs(z)
    q = rho / n**beta
    total = 0j
    power = 1 + 0j
    for m in range(MAX_TAIL_TERMS + 1):
        coef = m + 1 if order else 1
        s = alpha + beta * (m + 1 + order)
        majorant = coef * rho**m * n**-s * (1.0 + n / (s - 1.0))
        ratio = q * (m + 2) / (m + 1) if order else q
        bound = majorant / (1.0 - ratio) if ratio < 1 else math.inf
        if bound <= target or m == MAX_TAIL_TERMS:
            return total, bound, m
        total += coef * power * float(special.zeta(s, n))
        power *= -z
    raise AssertionError("unreachable")


def _eval_series(params, z, tol, max_terms, order, what):
    if not tol > 0:
        raise DomainError("tol must be positive")
    if max_terms < 2:
        raise DomainError("max_terms must be at least 2")
    w, flip = upper_half(z)
    _check_pole(params, w)
    rho = abs(w)
    wanted = (HEAD_FACTOR * rho) ** (1.0 / params.beta)
    n = max_terms if wanted >= max_terms else min(max(MIN_TERMS, math.ceil(wanted)), max_terms)
    best = math.inf
    while True:
        tail, bound, m = _tail_sum(params, w, n, order, tol)
        best = min(best, bound)
        if bound <= tol:
            break
        if n >= max_terms:
            raise ToleranceUnreachable(
                f"{what} at z={complex(z)!r}: bound {best:.3g} > tol {tol:.3g} "
                f"with the {max_terms}-term budget",
                best_bound=best,
            )
        n = min(2 * n, max_terms)
    value = _head_sum(params, w, n, order) + tail
    if order:
        value = -value
    value = _finite(value, what)
    return KernelEval(value.conjugate() if flip else value, bound, n - 1, m)


def eval_K(
    params: KernelParams, z, tol: float = DEFAULT_TOL, max_terms: int = TERM_BUDGET
) -> KernelEval:
    """Evaluate ``K(z)`` with truncation error at most ``tol``.

    Terms ``k < N`` are summed directly, with ``N**beta >= 10|z|``. The tail is
    the convergent expansion in Hurwitz zeta values
    ``sum_m (-z)**m zeta(alpha + beta*(m+1), N)``, truncated by a geometric
    majorant. N doubles while the bound misses ``tol``, up to ``max_terms``.
    """
    return _eval_series(params, z, tol, max_terms, 0, "K")


def eval_Kprime(
    params: KernelParams, z, tol: float = DEFAULT_TOL, max_terms: int = TERM_BUDGET
) -> KernelEval:
    """Evaluate ``K'(z) = -sum_k k**-alpha / (z + k**beta)**2``."""
    return _eval_series(params, z, tol, max_terms, 1, "K'")


def _require_sector(z: complex, delta: float):
    if delta < MIN_DELTA:
        raise SectorViolation(f"delta={delta:g} is below the minimum {MIN_DELTA:g}")
    if not in_sector(z, delta):
        raise SectorViolation(
            f"|arg z| = {abs(cmath.phase(z)):.6f} exceeds pi - delta = {math.pi - delta:.6f}"
        )


def _quad_piece(f, a, b, epsabs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(f, a, b, complex_func=True, epsabs=epsabs, epsrel=0.0, limit=400)
    err = abs(complex(err).real) + abs(complex(err).imag)
    return complex(value), err


def eval_h(
    params: KernelParams, z, tol: float = DEFAULT_TOL, delta: float = DEFAULT_DELTA
) -> KernelEval:
    """Evaluate the integral surrogate of K.

    After ``t = x**beta`` the integral is ``(1/beta) int_1^inf t**-r / (z + t) dt``.
    It is integrated in ``u = log t`` over ``[1, max(2,|z|)]`` and
    ``[max(2,|z|), T]`` with ``T = 8 max(1,|z|)``. Beyond T the tail is the
    series ``sum_m (-z)**m T**(-r-m) / (r+m)``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    w, flip = upper_half(z)
    _require_sector(w, delta)
    r, beta = params.r, params.beta
    rho = abs(w)
    split = max(2.0, rho)
    top = 8.0 * max(1.0, rho)
    budget = tol * beta

    def integrand(u):
        return math.exp((1.0 - r) * u) / (w + math.exp(u))

    first, err1 = _quad_piece(integrand, 0.0, math.log(split), budget / 8)
    second, err2 = _quad_piece(integrand, math.log(split), math.log(top), budget / 8)

    q = rho / top
    tail = 0j
    power = 1 + 0j
    tail_bound = math.inf
    for m in range(MAX_TAIL_TERMS + 1):
        majorant = rho**m * top ** (-r - m) / (r + m)
        tail_bound = majorant / (1.0 - q)
        if tail_bound <= budget / 4:
            break
        tail += power * top ** (-r - m) / (r + m)
        power *= -w
    total_err = (err1 + err2 + tail_bound) / beta
    if not total_err <= tol:
        raise QuadratureFailure(
            f"h at z={complex(z)!r}: error estimate {total_err:.3g} exceeds tol {tol:.3g}"
        )
    value = _finite((first + second + tail) / beta, "h")
    return KernelEval(value.conjugate() if flip else value, total_err, 0, m)


def leading_asymptotic(r: float, beta: float, z) -> complex:
    """``pi/(beta sin(pi r)) z**-r`` for r < 1, ``log(1+z)/(beta z)`` for r = 1.

    Principal branches throughout. Takes (r, beta) directly so that the formula
    can be evaluated for orders not reachable by an admissible (alpha, beta).
    """
    if not 0 < r <= 1:
        raise DomainError("requires 0 < r <= 1")
    w, flip = upper_half(z)
    if w == 0:
        raise DomainError("asymptotic form undefined at z = 0")
    if r == 1.0:
        value = cmath.log(1 + w) / (beta * w)
    else:
        value = math.pi / (beta * math.sin(math.pi * r)) * cmath.exp(-r * cmath.log(w))
    return value.conjugate() if flip else value


def asymptotic_K(params: KernelParams, z, delta: float = DEFAULT_DELTA) -> complex:
    """Leading large-|z| approximation of K inside the sector ``|arg z| <= pi - delta``."""
    w, _ = upper_half(z)
    _require_sector(w, delta)
    return leading_asymptotic(params.r, params.beta, z)


def euler_integral(r: float, method: str = "closed") -> float:
    """``int_0^inf dt / (t**r (1+t)) = pi / sin(pi r)`` for ``0 < r < 1``.

    ``method="quadrature"`` integrates numerically (in ``u = log t``) instead of
    using the closed form.
    """
    if not 0 < r < 1:
        raise DomainError("euler_integral requires 0 < r < 1")
    if method == "closed":
        return math.pi / math.sin(math.pi * r)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    left, _ = integrate.quad(lambda u: math.exp((1 - r) * u) / (1 + math.exp(u)), -np.inf, 0, epsabs=0, epsrel=1e-12)
    right, _ = integrate.quad(lambda u: math.exp(-r * u) / (1 + math.exp(-u)), 0, np.inf, epsabs=0, epsrel=1e-12)
    return left + right
