import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swclock.design import MAXIMAL_DIAL, DesignInput, close_design
from swclock.feasibility import (
    Axis,
    check,
    close_with_density,
    density_for,
    mass_class,
    material_note,
    size_class,
    sweep,
)
from swclock.quantities import load_constants

K = load_constants()
MN = K.nucleon_mass
NUC = K.density_nuclear


def design(**kw):
    return close_design(DesignInput.of(**kw), K)


def test_wigner_design_is_macroscopic():
    rep = check(design(tau=1e-8, T=8.64e4), 10)
    assert rep.req_a.passed and rep.req_b.passed and rep.req_c.passed
    assert not rep.req_d.passed
    assert rep.req_d.margin < 1e-9
    assert rep.mass_class == "macroscopic"
    assert rep.size_class == "macroscopic"
    assert not rep.relativistic_warning


def test_micro_mass_design_passes_everything():
    rep = check(design(tau=1e-7, n=1e7))
    assert rep.all_passed
    assert rep.req_d.margin > 1e2
    assert (rep.mass_class, rep.size_class) == ("microscopic", "macroscopic")


def test_nucleon_n100():
    d = design(n=100, M=MN, rho=NUC)
    rep = check(d, 10, 0.01)
    assert rep.req_c.passed and rep.req_d.passed
    # dx is about 10^3 R for this clock
    assert 1e2 < d.dx / d.R < 1e4
    assert rep.relativistic_warning
    assert rep.size_class == "microscopic" and rep.mass_class == "microscopic"


def test_nucleon_n10_is_marginal():
    d = design(n=10, M=MN, rho=NUC)
    rep = check(d, 10, 0.01)
    assert 5 < d.dx / d.R < 20
    assert rep.req_d.passed and rep.req_d.margin < 2
    assert rep.relativistic_warning


def test_margin_and_pass_agree():
    for d in (design(tau=1e-8, T=8.64e4), design(n=10, M=MN, rho=NUC)):
        rep = check(d)
        for r in (rep.req_a, rep.req_b, rep.req_c, rep.req_d):
            assert r.passed == (r.margin >= 1)


def test_strong_factor_changes_verdict():
    d = design(n=10, M=MN, rho=NUC)
    assert check(d, 10).req_d.passed
    assert not check(d, 20).req_d.passed


@pytest.mark.parametrize("sf,rt", [(1.0, 0.01), (0.5, 0.01), (10, 0.0), (10, 1.0)])
def test_check_preconditions(sf, rt):
    with pytest.raises(ValueError):
        check(design(tau=1e-7, n=1e7), sf, rt)


def test_class_boundaries_closed_on_micro_side():
    assert mass_class(1e-16) == "microscopic"
    assert mass_class(1.0000001e-16) == "macroscopic"
    assert size_class(1e-5) == "microscopic"
    assert size_class(0.5) == "intermediate"
    assert size_class(1.0) == "macroscopic"


def test_material_notes():
    assert material_note(design(n=100, M=1.67e-24, rho=NUC)) == "nucleon_scale"
    assert material_note(design(n=1e3, M=1e-20, rho=NUC)) == "unstable_nucleus_scale"
    assert material_note(design(tau=1e-7, n=1e7)) == "atomic_solid_scale"
    assert material_note(design(tau=1e-8, T=8.64e4)) == "bulk_scale"


def test_density_choices():
    assert density_for(MN, "auto") == NUC
    assert density_for(1e-20, "auto") == K.density_terrestrial
    assert density_for(1e-20, "nuclear") == NUC
    assert density_for(1e-20, 3.5) == 3.5
    with pytest.raises(ValueError):
        density_for(1.0, "lead")
    d = close_with_density({"n": 100, "tau": 7e-19}, MAXIMAL_DIAL, "auto", K)
    assert d.rho == NUC


@settings(max_examples=100)
@given(st.floats(-20, 2), st.floats(-3, 15))
def test_dx_over_r_decreases_with_n(log_tau, log_rho):
    tau, rho = 10**log_tau, 10**log_rho
    ns = np.geomspace(2, 1e12, 25)
    ds = [design(tau=tau, n=float(n), rho=rho) for n in ns]
    ratios = [d.dx / d.R for d in ds]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    # so req_d never flips from fail back to pass as n grows
    passes = [r >= 10 for r in ratios]
    assert passes == sorted(passes, reverse=True)


@pytest.fixture(scope="module")
def survey():
    return sweep(Axis("n", 10, 1e6, 6), Axis("M", 1e-27, 1e-16, 12), MAXIMAL_DIAL,
                 10, "nuclear", K)


def test_sweep_grid_shape(survey):
    assert len(survey.cells) == 6 and all(len(r) == 12 for r in survey.cells)
    assert np.all(np.diff(survey.axis1.grid) > 0) and np.all(np.diff(survey.axis2.grid) > 0)
    assert survey.summary["invalid_cells"] == 0
    for cell in survey.iter_cells():
        assert cell.design.n == pytest.approx(cell.x, rel=1e-12)
        assert cell.design.M == pytest.approx(cell.y, rel=1e-12)


def test_sweep_implication_chain(survey):
    for cell in survey.iter_cells():
        rep = cell.report
        if rep.req_a.passed:
            # margin = n^2/f^2 * f exactly; allow round-off at equality
            assert rep.req_b.passed
            assert rep.req_b.margin >= rep.strong_factor * (1 - 1e-12)


def test_sweep_n100_edge_masses_fail(survey):
    i = list(survey.axis1.grid).index(100.0)
    for cell in survey.cells[i]:
        if cell.y >= 1e-20 * (1 - 1e-9) or cell.y <= 1e-27 * (1 + 1e-9):
            r = cell.report
            assert (not r.req_c.passed or not r.req_d.passed
                    or cell.design.dial >= 1e-5)


def test_sweep_summary_reports_material_blind_bound(survey):
    # with bulk nuclear matter allowed, n = 1e4 with 1e-20 g would work
    assert survey.summary["max_feasible_n_ignoring_material"] == pytest.approx(1e4)
    assert survey.summary["max_feasible_n"] <= 1e3


def test_sweep_is_deterministic_across_workers():
    a = sweep(Axis("n", 10, 1e6, 6), Axis("M", 1e-27, 1e-16, 12), rho="auto", workers=1)
    b = sweep(Axis("n", 10, 1e6, 6), Axis("M", 1e-27, 1e-16, 12), rho="auto", workers=4)
    assert a.summary == b.summary
    assert [c.design for c in a.iter_cells()] == [c.design for c in b.iter_cells()]


def test_sweep_overflow_cells_are_invalid():
    res = sweep(Axis("n", 1e2, 1e120, 3), Axis("tau", 1e-300, 1e-200, 2))
    assert res.summary["invalid_cells"] > 0
    assert any(c.valid for c in res.iter_cells())


def test_degenerate_grid_rejected():
    with pytest.raises(ValueError):
        Axis("n", 10, 1e6, 1)
    with pytest.raises(ValueError):
        Axis("n", 1e6, 10, 4)
    with pytest.raises(ValueError):
        sweep(Axis("n", 10, 100, 2), Axis("n", 10, 100, 2))


def test_axis_parse():
    assert Axis.parse("M:1e-27:1e-16:12") == Axis("M", 1e-27, 1e-16, 12)
    with pytest.raises(ValueError):
        Axis.parse("M:1e-27:12")


def test_sweep_with_dependent_axes_fails_fast():
    from swclock.design import DesignError

    with pytest.raises(DesignError):
        sweep(Axis("n", 10, 100, 2), Axis("u", 1e8, 1e9, 2))
