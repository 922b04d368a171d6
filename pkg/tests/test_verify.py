import math

import pytest

from gp_spectrum import verify
from gp_spectrum.errors import DomainError, SectorViolation
from gp_spectrum.kernel import KernelParams, SectorSpec

LOG = KernelParams(1.0, 1.0)
SMALL = SectorSpec(rho_min=10, rho_max=1000)


def test_grid_report_structure():
    rep = verify.check_series_vs_integral(KernelParams(0.5, 1), SMALL, per_decade=2)
    d = rep.to_dict()
    assert set(d) == {"experiment_id", "grid", "statistic", "reference", "ratio", "cap",
                      "passed", "details", "anchors"}
    assert len(d["details"]) == 5 * 5
    assert rep.passed and 0 < rep.ratio < rep.cap


def test_log_branch_anchors():
    rep = verify.check_series_vs_integral(LOG, SMALL, per_decade=2)
    a = {x["z"]: x for x in rep.anchors}
    assert a[1.0]["h_closed"] == pytest.approx(math.log(2))
    assert abs(a[1.0]["h_quad"] - math.log(2)) < 1e-10
    rep = verify.check_K_asymptotic(LOG, SMALL, per_decade=2)
    assert rep.anchors[0]["difference"] == pytest.approx(1 - math.log(2), abs=1e-10)
    rep = verify.check_zKprime(LOG, SMALL, per_decade=2)
    assert rep.anchors[0]["abs_Kprime"] == pytest.approx(2 - math.pi**2 / 6, abs=1e-10)


def test_conjugate_rays_give_identical_values():
    rep = verify.check_K_asymptotic(KernelParams(0.75, 1), SMALL, per_decade=2)
    by_key = {(d["arg"], d["rho"]): d["value"] for d in rep.details}
    for (arg, rho), v in by_key.items():
        assert by_key[(-arg, rho)] == v


def test_ratio_is_monotone_in_grid_extent():
    p = KernelParams(0.2, 1)
    short = verify.check_zKprime(p, SectorSpec(rho_min=10, rho_max=100), per_decade=2)
    long_ = verify.check_zKprime(p, SectorSpec(rho_min=10, rho_max=1000), per_decade=2)
    assert long_.ratio >= short.ratio


def test_degenerate_sector_refused():
    with pytest.raises(SectorViolation):
        verify.check_series_vs_integral(KernelParams(0.5, 1), SectorSpec(delta=1e-4))
    with pytest.raises(SectorViolation):
        verify.check_sector_comparability(delta=1e-4)


def test_log_normalisation_needs_large_moduli():
    with pytest.raises(DomainError):
        verify.check_zKprime(LOG, SectorSpec(rho_min=0.5, rho_max=10))


def test_sector_check_deterministic_and_tight():
    a = verify.check_sector_comparability(samples=2000, seed=3)
    b = verify.check_sector_comparability(samples=2000, seed=3)
    assert a.to_dict() == b.to_dict()
    assert a.passed and a.ratio == 0
    tight = [x for x in a.anchors if x["case"] == "tight_lower"]
    assert all(x["lower_quotient"] == pytest.approx(1.0) for x in tight)
    pos = [x for x in a.anchors if x["case"] == "positive_real"]
    assert all(x["upper_quotient"] <= 1.0 for x in pos)


@pytest.mark.parametrize("delta", [0.05, 0.5, math.pi / 6, math.pi / 2])
def test_sector_check_holds_for_other_margins(delta):
    rep = verify.check_sector_comparability(delta=delta, samples=5000, seed=1, beta=1.5)
    assert rep.passed
    assert rep.statistic <= 1.0 + 1e-12 and rep.reference >= 1.0 - 1e-12


def test_slope_cap():
    assert verify.slope_cap(0.2) == pytest.approx(0.75)
    assert verify.slope_cap(0.5) == pytest.approx(0.15)
    assert verify.slope_cap(1.0) == pytest.approx(0.15)


def test_theorem_small_run():
    rep = verify.check_theorem(KernelParams(0.5, 1), 20, 200, spot_ns=(40,))
    d = rep.to_dict()
    assert rep.converged == 181 and rep.criteria["residuals"] and rep.criteria["left_half_plane"]
    assert d["spot_checks"][0]["count"] == 1 and d["spot_checks"][0]["agrees"]
    assert set(d["fits"]) == {"as_stated", "half"}


def test_run_experiments_rejects_unknown():
    with pytest.raises(DomainError):
        verify.run_experiments([LOG], ["nonsense"])


def test_sector_check_reports_violations():
    # Beyond delta = pi/2 the lower constant 1 - cos(delta) exceeds 1 and fails.
    rep = verify.check_sector_comparability(delta=2.0, samples=2000, seed=1)
    assert not rep.passed and rep.ratio > 0 and rep.details
