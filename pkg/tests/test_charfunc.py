import math

import pytest

from gp_spectrum import kernel
from gp_spectrum.charfunc import (
    ModeProblem,
    char_fn,
    char_fn_prime,
    g_map,
    solve_mode,
    solve_range,
    thread_count,
)
from gp_spectrum.errors import DomainError, EscapedRegion, RegionViolation
from gp_spectrum.kernel import KernelParams

HALF = KernelParams(0.5, 1.0)

# Roots of D_100, found by mpmath findroot on an independent K (see
# tests/derive_oracle_values.py) and frozen.
ROOTS_100 = {
    (0.5, 1.0): -13.097625492082868 + 89.37035595257198j,
    (1.0, 1.0): -2.6440035350112754 + 99.30061587204295j,
    (0.2, 1.0): -102.49346838332414 + 51.3865508254067j,
    (0.5, 2.0): -2.5961639376246866 + 98.71408382068901j,
}


def test_char_fn_on_imaginary_axis():
    prob = ModeProblem(40, HALF)
    assert char_fn(prob, 40j) == -kernel.eval_K(HALF, 40j, prob.kernel_tol).value


def test_char_fn_frozen():
    ref = -0.6673932018931282 + 0.3897990519556031j
    assert abs(char_fn(ModeProblem(10, HALF), -1 + 10j) - ref) < 1e-11


def test_derivative_matches_difference():
    prob = ModeProblem(30, KernelParams(0.75, 1.0))
    z, h = -5 + 28j, 1e-5
    fd = (char_fn(prob, z + h) - char_fn(prob, z - h)) / (2 * h)
    assert abs(char_fn_prime(prob, z) - fd) < 1e-8


def test_g_map():
    prob = ModeProblem(100, HALF)
    assert g_map(prob, 0) == pytest.approx(-0.5j * kernel.eval_K(HALF, 100j, prob.kernel_tol).value, abs=1e-16)
    ref = -0.10364131057620697 - 0.11319018640280186j
    assert abs(g_map(prob, 0.01 - 0.01j) - ref) < prob.kernel_tol
    with pytest.raises(RegionViolation):
        g_map(prob, 0.5)


@pytest.mark.parametrize("ab", list(ROOTS_100))
def test_solve_mode_frozen_roots(ab):
    pt = solve_mode(ModeProblem(100, KernelParams(*ab)))
    assert abs(pt.z - ROOTS_100[ab]) < 1e-8
    assert pt.residual < 1e-10
    assert pt.z.imag > 0 and pt.z.real < 0
    assert pt.conjugate == pt.z.conjugate()
    assert abs(char_fn(ModeProblem(100, KernelParams(*ab)), pt.conjugate)) < 1e-10


def test_method_reporting():
    assert solve_mode(ModeProblem(100, HALF)).method == "fixed_point"
    assert solve_mode(ModeProblem(100, KernelParams(0.2, 1.0))).method == "newton_prediction"


def test_escape_without_fallback():
    with pytest.raises(EscapedRegion):
        solve_mode(ModeProblem(100, KernelParams(0.2, 1.0)), fallback=False)


@pytest.mark.parametrize("ab", [(0.5, 1.0), (0.75, 1.0), (1.0, 1.0)])
@pytest.mark.parametrize("n", [50, 120, 300])
def test_contraction_steps_nonincreasing(ab, n):
    pt = solve_mode(ModeProblem(n, KernelParams(*ab)))
    assert pt.method == "fixed_point"
    steps = pt.steps[1:]
    assert all(b <= a for a, b in zip(steps, steps[1:])), steps


@pytest.mark.slow
def test_contraction_threshold_small_r():
    # r = 0.2 contracts only far out; 30000 is above the measured threshold.
    pt = solve_mode(ModeProblem(30_000, KernelParams(0.2, 1.0)))
    assert pt.method == "fixed_point"
    steps = pt.steps[1:]
    assert all(b <= a for a, b in zip(steps, steps[1:]))


def test_solve_range():
    res = solve_range(HALF, 50, 60)
    assert [p.n for p in res.points] == list(range(50, 61)) and not res.failures
    assert all(p.residual < 1e-10 for p in res.points)


def test_solve_range_threads_agree():
    a = solve_range(HALF, 20, 27, threads=1)
    b = solve_range(HALF, 20, 27, threads=4)
    assert [p.z for p in a.points] == [p.z for p in b.points]


def test_thread_env(monkeypatch):
    monkeypatch.setenv("GP_SPECTRUM_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("GP_SPECTRUM_THREADS", "many")
    with pytest.raises(DomainError):
        thread_count()


def test_rejects_bad_input():
    with pytest.raises(DomainError):
        solve_range(HALF, 10, 5)
    with pytest.raises(DomainError):
        ModeProblem(0, HALF)
    with pytest.raises(DomainError):
        ModeProblem(5, HALF, tol_fp=0)
    with pytest.raises(DomainError):
        solve_mode(ModeProblem(5, HALF), variant="double")


def test_kernel_tolerance_tracks_residual():
    assert math.isclose(ModeProblem(5, HALF, tol_residual=1e-8).kernel_tol, 1e-9)
