"""Per-mode characteristic function and its complex root near ``+in``.

The Fourier mode n contributes the denominator ``z**2 + n**2 - n**2 K(z)``;
normalised, its zeros are those of

    D_n(z) = z**2 / n**2 + 1 - K(z).

Writing ``z = i n + n tau`` turns ``D_n(z) = 0`` into ``tau (tau + 2i) = K(z)``,
i.e. the fixed-point problem ``tau = g_n(tau) = K(i n + tau n) / (tau + 2i)``.
The lower root is always the conjugate of the upper one and is never solved for.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .asymptotics import VARIANTS, predict
from .errors import (
    DomainError,
    EscapedRegion,
    NoConvergence,
    PoleProximity,
    RegionViolation,
    SpectrumError,
    ToleranceUnreachable,
)
from .kernel import KernelParams, eval_K, eval_Kprime, upper_half

log = logging.getLogger(__name__)

REGION_RADIUS = 0.5
NEWTON_STEPS = 60
THREADS_ENV = "GP_SPECTRUM_THREADS"


@dataclass(frozen=True)
class ModeProblem:
    n: int
    params: KernelParams
    tol_fp: float = 1e-12
    tol_residual: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("mode index n must be a positive integer")
        if not (self.tol_fp > 0 and self.tol_residual > 0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be positive")

    @property
    def kernel_tol(self) -> float:
        return self.tol_residual / 10.0


@dataclass(frozen=True)
class SpectrumPoint:
    """Certified root ``z_n^+`` of ``D_n``.

    ``residual`` is ``|D_n(z)|`` plus the truncation bound of K, so the exact
    residual is no larger. ``method`` names the route that produced the root:
    ``fixed_point``, ``newton_prediction`` or ``oracle``. ``steps`` holds the
    fixed-point step sizes ``|tau_{k+1} - tau_k|``.
    """

    n: int
    z: complex
    tau: complex
    residual: float
    iterations: int
    refined: bool
    prediction: complex
    deviation: float
    method: str = "fixed_point"
    fp_residual: Optional[float] = None
    newton_residual: Optional[float] = None
    steps: tuple = field(default=(), repr=False)

    @property
    def conjugate(self) -> complex:
        return self.z.conjugate()


def _residual(problem: ModeProblem, z: complex):
    """``D_n(z)`` computed on the upper half-plane, with K's truncation bound."""
    w, flip = upper_half(z)
    n = problem.n
    k = eval_K(problem.params, w, problem.kernel_tol)
    value = w * w / (n * n) + 1 - k.value
    return (value.conjugate() if flip else value), k.error_bound


def char_fn(problem: ModeProblem, z) -> complex:
    """``z**2/n**2 + 1 - K(z)`` with K at tolerance ``tol_residual / 10``."""
    return _residual(problem, z)[0]


def char_fn_prime(problem: ModeProblem, z) -> complex:
    w, flip = upper_half(z)
    n = problem.n
    value = 2 * w / (n * n) - eval_Kprime(problem.params, w, problem.kernel_tol).value
    return value.conjugate() if flip else value


def g_map(problem: ModeProblem, tau) -> complex:
    """The contraction ``K(i n + tau n) / (tau + 2i)`` on ``|tau| < 1/2``."""
    tau = complex(tau)
    if not abs(tau) < REGION_RADIUS:
        raise RegionViolation(f"|tau| = {abs(tau):.3g} is outside |tau| < {REGION_RADIUS}")
    n = problem.n
    z = complex(0.0, n) + tau * n
    return eval_K(problem.params, z, problem.kernel_tol).value / (tau + 2j)


def _newton(problem: ModeProblem, z: complex):
    """Damped Newton on D_n; returns ``(z, certified residual)``."""
    d, bound = _residual(problem, z)
    target = problem.tol_residual * 1e-2
    for _ in range(NEWTON_STEPS):
        if abs(d) + bound <= target:
            break
        step = d / char_fn_prime(problem, z)
        lam = 1.0
        while True:
            cand = z - lam * step
            try:
                dc, bc = _residual(problem, cand)
            except (PoleProximity, ToleranceUnreachable):
                dc, bc = complex(math.inf), math.inf
            if abs(dc) < abs(d) or lam < 1e-6:
                break
            lam /= 2
        if not abs(dc) < abs(d):
            break
        z, d, bound = cand, dc, bc
    return z, abs(d) + bound


def _non_real(z: complex) -> bool:
    return abs(z.imag) > 1e-8 * max(1.0, abs(z))


def _fixed_point(problem: ModeProblem):
    tau = 0j
    steps = []
    for it in range(1, problem.max_iter + 1):
        new = g_map(problem, tau)
        steps.append(abs(new - tau))
        tau = new
        if not abs(tau) < REGION_RADIUS:
            return tau, it, steps, "escaped"
        if steps[-1] < problem.tol_fp:
            return tau, it, steps, "converged"
    return tau, problem.max_iter, steps, "max_iter"


def _search_rectangle(problem: ModeProblem):
    from .oracle import Rectangle

    n = problem.n
    return Rectangle(-3.0 * n - 5.0, 0.5 * n + 5.0, 0.05 * n, 1.5 * n + 5.0)


def _oracle_root(problem: ModeProblem, guess: complex):
    from .oracle import isolate_zeros, locate_zero

    boxes = isolate_zeros(problem, _search_rectangle(problem))
    if not boxes:
        return None
    box = min(boxes, key=lambda b: abs(b.center - guess))
    return locate_zero(problem, box, 1e-6 * problem.n)


def solve_mode(
    problem: ModeProblem, variant: str = "as_stated", fallback: bool = True
) -> SpectrumPoint:
    """Locate ``z_n^+`` by fixed-point iteration from ``tau = 0``, then Newton.

    If an iterate leaves ``|tau| < 1/2`` the mode is below the contraction
    threshold. With ``fallback`` the root is then sought by Newton seeded from
    both predicted forms, and as a last resort from an argument-principle
    search; otherwise :class:`EscapedRegion` is raised.
    """
    if variant not in VARIANTS:
        raise DomainError(f"unknown constant variant {variant!r}")
    n = problem.n
    tol = problem.tol_residual
    tau, iterations, steps, status = _fixed_point(problem)
    log.debug("mode %d: fixed point %s after %d iterations", n, status, iterations)

    z = fp_res = nw_res = None
    method, refined = "fixed_point", False
    if status != "escaped":
        z_fp = complex(0.0, n) + n * tau
        d_fp, b_fp = _residual(problem, z_fp)
        fp_res = abs(d_fp) + b_fp
        z_nw, nw_res = _newton(problem, z_fp)
        if nw_res < fp_res:
            z, refined = z_nw, True
        else:
            z = z_fp
        if not (min(fp_res, nw_res) < tol and _non_real(z)):
            z = None
    elif not fallback:
        raise EscapedRegion(f"mode {n}: iterate {iterations} left |tau| < {REGION_RADIUS}")

    if z is None and fallback:
        method, refined = "newton_prediction", True
        for seed_variant in ("half", "as_stated"):
            seed = predict(problem.params, n, seed_variant).predicted_z
            cand, res = _newton(problem, seed)
            if res < tol and _non_real(cand):
                z, nw_res = cand, res
                break
    if z is None and fallback:
        method = "oracle"
        guess = predict(problem.params, n, "half").predicted_z
        located = _oracle_root(problem, complex(guess.real, abs(guess.imag)))
        if located is not None:
            cand, res = _newton(problem, located)
            if res < tol and _non_real(cand):
                z, nw_res = cand, res
    if z is None:
        raise NoConvergence(f"mode {n}: no certified non-real root found")

    if z.imag < 0:
        z = z.conjugate()
    d, bound = _residual(problem, z)
    residual = abs(d) + bound
    pred = predict(problem.params, n, variant).predicted_z
    return SpectrumPoint(
        n=n,
        z=z,
        tau=(z - complex(0.0, n)) / n,
        residual=residual,
        iterations=iterations,
        refined=refined,
        prediction=pred,
        deviation=abs(z - pred),
        method=method,
        fp_residual=fp_res,
        newton_residual=nw_res,
        steps=tuple(steps),
    )


@dataclass
class RangeResult:
    points: list
    failures: dict

    @property
    def converged(self) -> int:
        return len(self.points)


def thread_count(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 0:
        raise DomainError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def solve_range(
    params: KernelParams,
    n_min: int,
    n_max: int,
    tol_fp: float = 1e-12,
    tol_residual: float = 1e-10,
    max_iter: int = 200,
    variant: str = "as_stated",
    threads: Optional[int] = None,
) -> RangeResult:
    """Solve every mode in ``[n_min, n_max]``; failures are collected, not raised."""
    if not 1 <= n_min <= n_max:
        raise DomainError("requires 1 <= n_min <= n_max")

    def one(n):
        problem = ModeProblem(n, params, tol_fp, tol_residual, max_iter)
        try:
            return solve_mode(problem, variant)
        except SpectrumError as exc:
            return exc

    modes = range(int(n_min), int(n_max) + 1)
    workers = min(thread_count(threads), len(modes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(one, modes))
    else:
        outcomes = [one(n) for n in modes]
    points, failures = [], {}
    for n, out in zip(modes, outcomes):
        if isinstance(out, SpectrumPoint):
            points.append(out)
        else:
            failures[n] = f"{type(out).__name__}: {out}"
            log.warning("mode %d failed: %s", n, failures[n])
    return RangeResult(points, failures)
