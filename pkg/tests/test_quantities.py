import math
from fractions import Fraction

import pytest
import scipy.constants as sc
from hypothesis import given, strategies as st

from swclock.quantities import (
    ConfigurationError,
    Dimension,
    Quantity,
    dimension,
    load_constants,
    read_constants_file,
)


def test_defaults_match_codata():
    k = load_constants()
    # scipy ships SI CODATA; convert to CGS independently
    assert k.hbar == pytest.approx(sc.hbar * 1e7, rel=1e-9)
    assert k.c == pytest.approx(sc.c * 1e2, rel=1e-12)
    assert k.nucleon_mass == pytest.approx(sc.m_p * 1e3, rel=1e-8)
    assert k.hbar == pytest.approx(1.0546e-27, rel=1e-4)
    assert k.density_terrestrial == 1.0


def test_nuclear_density_gives_nucleon_radius_near_1e13():
    k = load_constants()
    R = 0.62 * (k.nucleon_mass / k.density_nuclear) ** (1 / 3)
    assert 0.5e-13 < R < 2e-13


def test_hbar_over_c2_close_to_rounded_constant():
    k = load_constants()
    assert 1 / 1.2 < k.hbar_over_c2 / 1e-48 < 1.2


def test_override_passes_through():
    k = load_constants({"hbar": 1.0e-27})
    assert k.hbar == 1.0e-27
    assert k.c == load_constants().c


@pytest.mark.parametrize("bad", [-1, 0, float("nan"), float("inf"), "fast"])
def test_bad_override_names_field(bad):
    with pytest.raises(ConfigurationError, match="c"):
        load_constants({"c": bad})


def test_unknown_override_rejected():
    with pytest.raises(ConfigurationError, match="planck"):
        load_constants({"planck": 1.0})


def test_file_then_flag_precedence(tmp_path):
    f = tmp_path / "k.txt"
    f.write_text("# rounded\nhbar = 1.0e-27\nc: 3e10\n\n")
    assert read_constants_file(f) == {"hbar": 1.0e-27, "c": 3e10}
    k = load_constants({"c": 2.9e10}, path=f)
    assert (k.hbar, k.c) == (1.0e-27, 2.9e10)


def test_env_path(tmp_path, monkeypatch):
    f = tmp_path / "k.txt"
    f.write_text("nucleon_mass = 1e-24\n")
    monkeypatch.setenv("SWCLOCK_CONSTANTS", str(f))
    assert load_constants(use_env=True).nucleon_mass == 1e-24
    assert load_constants().nucleon_mass != 1e-24


def test_bad_file_line(tmp_path):
    f = tmp_path / "k.txt"
    f.write_text("hbar 1e-27\n")
    with pytest.raises(ConfigurationError, match=":1"):
        read_constants_file(f)


def test_adding_mismatched_dimensions_fails():
    with pytest.raises(TypeError, match="dimension mismatch"):
        Quantity(1.0, "time") + Quantity(1.0, "length")


def test_derived_dimensions():
    length, time, mass = (Quantity(2.0, d) for d in ("length", "time", "mass"))
    assert (length / time).dim == dimension("speed")
    assert (mass * length / time).dim == dimension("momentum")
    assert (mass / length**3).dim == dimension("density")
    cube_root = Quantity(8.0, "mass") ** Fraction(1, 3)
    assert cube_root.value == pytest.approx(2.0)
    assert cube_root.dim == Dimension(mass=Fraction(1, 3))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        Quantity(math.inf, "time")


exps = st.integers(-4, 4)
dims = st.builds(Dimension, exps, exps, exps)


@given(dims, dims, st.floats(1e-10, 1e10), st.floats(1e-10, 1e10))
def test_dimension_algebra(da, db, a, b):
    qa, qb = Quantity(a, da), Quantity(b, db)
    prod, quot = qa * qb, qa / qb
    assert (prod.dim.mass, prod.dim.length, prod.dim.time) == (
        da.mass + db.mass, da.length + db.length, da.time + db.time)
    assert (quot.dim.mass, quot.dim.length, quot.dim.time) == (
        da.mass - db.mass, da.length - db.length, da.time - db.time)
    assert (quot * qb).dim == da
