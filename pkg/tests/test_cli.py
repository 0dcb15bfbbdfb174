import csv
import io
import json
from xml.sax.saxutils import escape

import jsonschema
import pytest

from swclock import __version__
from swclock.cli import main
from swclock.reports import REGION_COLORS, REGION_LEGEND, csv_header_contract, load_schema

SCHEMA = load_schema()
HEADERS = csv_header_contract()


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--output", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


@pytest.fixture(autouse=True)
def _no_env_constants(monkeypatch):
    monkeypatch.delenv("SWCLOCK_CONSTANTS", raising=False)


def test_derive_table():
    code, out, _ = run("derive", "--tau", "1e-8", "--T", "8.64e4")
    assert code == 0
    assert "design (maximal_dial)" in out


def test_derive_json_mass():
    code, doc = run_json("derive", "--tau", "1e-8", "--T", "8.64e4")
    assert code == 0
    assert 0.048 <= doc["design"]["M"] <= 0.108
    assert doc["command"] == "derive" and doc["schema_version"] == "1"


def test_underdetermined_exit_2():
    code, out, err = run("derive", "--tau", "1e-8")
    assert code == 2 and out == ""
    assert "under-determined" in err


def test_inconsistent_exit_2():
    code, _, err = run("derive", "--tau", "1e-8", "--T", "1e4", "--n", "7")
    assert code == 2 and "inconsistent" in err


def test_bad_flag_exit_2():
    assert run("derive", "--tau", "x")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("derive", "--tau", "1e-8", "--T", "1", "--rho", "lead")[0] == 2


def test_check_strict_exit_codes():
    assert run("check", "--tau", "1e-7", "--n", "1e7", "--strict")[0] == 0
    assert run("check", "--tau", "1e-8", "--T", "8.64e4", "--strict")[0] == 1
    # without --strict a failed requirement is only reported
    assert run("check", "--tau", "1e-8", "--T", "8.64e4")[0] == 0


def test_check_json():
    code, doc = run_json("check", "--n", "100", "--M", "1.67262192e-24", "--rho", "nuclear")
    assert code == 0
    assert doc["feasibility"]["relativistic_warning"] is True
    assert doc["material"] == "nucleon_scale"


def test_invert_age_of_universe():
    code, doc = run_json("invert", "--target", "T", "--n", "8.64e12", "--M", "1e-16")
    assert code == 0
    assert doc["value"] > 4.3e17
    assert doc["dimension"] == "time"


def test_invert_table():
    code, out, _ = run("invert", "--target", "n", "--tau", "1e-18", "--M", "1.67262192e-24")
    assert code == 0 and out.startswith("n = ")


def test_sweep_json_and_summary():
    code, doc = run_json("sweep")
    assert code == 0
    assert len(doc["cells"]) == 72
    assert doc["axes"][0]["field"] == "n" and doc["axes"][1]["points"] == 12


def test_simulate_json():
    code, doc = run_json("simulate", "--tau", "1e-7", "--n", "1e7", "--samples", "20000")
    assert code == 0
    assert doc["spreading"]["satisfied"] is True
    assert doc["arrival"]["samples"] == 20000


def test_simulate_strict_on_closed_design():
    # closure fixes the growth at sqrt(2), so --strict succeeds for any design
    assert run("simulate", "--tau", "1e-7", "--n", "1e7", "--samples", "2000",
               "--strict")[0] == 0


def test_simulate_density_dump(tmp_path):
    path = tmp_path / "rho.csv"
    code, _, _ = run("simulate", "--tau", "1e-7", "--n", "1e7", "--samples", "2000",
                     "--dump-density", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == HEADERS["density_dump"]
    assert {r[2] for r in rows[1:]} and len({r[2] for r in rows[1:]}) == 3


def test_reproduce_all_pass():
    code, doc = run_json("reproduce")
    assert code == 0 and doc["passed"]
    assert all(r["citation"] for r in doc["rows"])


def test_reproduce_case_filter():
    code, doc = run_json("reproduce", "--case", "nucleon-*")
    assert code == 0
    assert {r["case"] for r in doc["rows"]} == {"nucleon-n100", "nucleon-n10"}
    assert run("reproduce", "--case", "nothing-*")[0] == 2


@pytest.mark.parametrize("argv", [
    ("derive", "--tau", "1e-8", "--T", "8.64e4"),
    ("check", "--tau", "1e-7", "--n", "1e7"),
    ("sweep",),
    ("simulate", "--tau", "1e-7", "--n", "1e7", "--samples", "5000", "--seed", "4"),
    ("reproduce",),
])
@pytest.mark.parametrize("fmt", ["json", "csv", "table"])
def test_outputs_are_byte_deterministic(argv, fmt):
    a = run(*argv, "--output", fmt)
    b = run(*argv, "--output", fmt)
    assert a == b and a[1]


@pytest.mark.parametrize("argv,key", [
    (("derive", "--tau", "1e-8", "--T", "8.64e4"), "design"),
    (("check", "--tau", "1e-7", "--n", "1e7"), "check"),
    (("simulate", "--tau", "1e-7", "--n", "1e7", "--samples", "2000"), "simulate"),
    (("reproduce",), "reproduce"),
])
def test_csv_headers_follow_contract(argv, key):
    _, out, _ = run(*argv, "--output", "csv")
    assert next(csv.reader(io.StringIO(out))) == HEADERS[key]


def test_sweep_csv_header():
    _, out, _ = run("sweep", "--output", "csv")
    header = next(csv.reader(io.StringIO(out)))
    assert header[:5] == ["i", "j", "n_axis", "M_axis", "valid"]
    assert header[-3:] == HEADERS["sweep_suffix"]


def test_sweep_svg(tmp_path):
    path = tmp_path / "map.svg"
    code, out, _ = run("sweep", "--output", "svg", "--out", str(path))
    assert code == 0 and out == ""
    text = path.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert f"<!-- swclock {__version__} -->" in text
    assert '<g id="legend">' in text
    for key, color in REGION_COLORS.items():
        assert f'fill="{color}"' in text
        assert escape(REGION_LEGEND[key]) in text


def test_svg_only_for_sweep():
    code, _, err = run("derive", "--tau", "1e-8", "--T", "8.64e4", "--output", "svg")
    assert code == 2 and "only available for sweep" in err


def test_constant_precedence(tmp_path, monkeypatch):
    env_file = tmp_path / "env.txt"
    env_file.write_text("c = 2e10\n")
    flag_file = tmp_path / "flag.txt"
    flag_file.write_text("# override\nc: 2.5e10\n")
    base = ("derive", "--tau", "1e-8", "--T", "8.64e4")

    def c_used(*extra):
        return run_json(*base, *extra)[1]["constants"]["c"]

    assert c_used() == 29979245800.0
    monkeypatch.setenv("SWCLOCK_CONSTANTS", str(env_file))
    assert c_used() == 2e10
    assert c_used("--constants", str(flag_file)) == 2.5e10
    assert c_used("--constants", str(flag_file), "--const", "c=3e10") == 3e10


def test_bad_constant_exit_2():
    code, _, err = run("derive", "--tau", "1e-8", "--T", "1", "--const", "hbar=-1")
    assert code == 2
    code, _, err = run("derive", "--tau", "1e-8", "--T", "1", "--const", "planck=1")
    assert code == 2 and "unknown constant" in err


def test_human_adds_conversions():
    _, plain, _ = run("derive", "--tau", "1e-8", "--T", "8.64e4")
    _, human, _ = run("derive", "--tau", "1e-8", "--T", "8.64e4", "--human")
    assert len(human) > len(plain)


def test_version():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
