import csv
import io
import json
import math

import pytest

from sl2lab.app import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, Lab
from sl2lab.cayley import CayleyContext, default_girth_length, dense_diameter
from sl2lab.constants import DomainError, ImplementationBugError
from sl2lab.models import CayleyRecord
from tests.conftest import run_lab


def json_lines(out):
    return [json.loads(line) for line in out.splitlines()]


def test_command_surface(lab, snapshot):
    surface = "".join(
        f"{command.name}: {' '.join(flag for param in command.params for flag in param.flags)}\n"
        for command in lab.router.commands
    )
    snapshot.assert_match(surface, "commands.txt")


@pytest.mark.parametrize(
    "p", [pytest.param(5, id="p5"), pytest.param(10007, id="p10007"), pytest.param(10**9 + 7, id="p1e9")]
)
def test_girth_length_help_matches_default(lab, p):
    (command,) = [command for command in lab.router.commands if command.name == "random-pairs"]
    (girth_len,) = [param for param in command.params if param.name == "girth_len"]
    assert "floor(log p / (2 log 4))" in girth_len.description
    assert default_girth_length(p) == max(1, math.floor(math.log(p) / (2 * math.log(4))))


def test_diameter_json(lab, capsys, group5, offdiag1):
    code, out = run_lab(lab, capsys, "diameter", "--p", "5")
    assert code == EXIT_OK
    config, record, summary = json_lines(out)
    assert config["config"]["command"] == "diameter"
    assert config["config"]["p"] == 5
    assert record["diameter"] == dense_diameter(CayleyContext.build(group5, offdiag1))
    assert record["generates"] is True
    assert record["config_hash"] == summary["config_hash"] == config["config"]["config_hash"]
    assert summary["records"] == 1
    assert summary["failures"] == 0
    assert summary["stats"]["diameter_max"] == record["diameter"]


def test_json_keys_are_sorted(lab, capsys):
    _, out = run_lab(lab, capsys, "girth", "--p", "5", "--max-len", "4")
    for line in out.splitlines():
        keys = list(json.loads(line))
        assert keys == sorted(keys)


def test_config_hash_is_stable(lab, capsys):
    _, first = run_lab(lab, capsys, "diameter", "--p", "7", "--seed", "3")
    _, second = run_lab(lab, capsys, "diameter", "--p", "7", "--seed", "3")
    _, other = run_lab(lab, capsys, "diameter", "--p", "7", "--seed", "4")
    assert json_lines(first)[0] == json_lines(second)[0]
    assert json_lines(first)[0]["config"]["config_hash"] != json_lines(other)[0]["config"]["config_hash"]


def test_csv(lab, capsys):
    code, out = run_lab(lab, capsys, "diameter", "--p-range", "5:7", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == list(CayleyRecord.model_fields)
    assert [row[0] for row in rows[1:3]] == ["5", "7"]
    assert rows[1][rows[0].index("girth")] == ""
    assert rows[3][:4] == ["command", "seed", "records", "failures"]
    assert rows[4][:4] == ["diameter", "0", "2", "0"]
    assert len(rows) == 5


def test_out_file(lab, capsys, tmp_path):
    path = tmp_path / "records.jsonl"
    code, out = run_lab(lab, capsys, "diameter", "--p", "5", "--out", str(path))
    assert code == EXIT_OK
    assert out == ""
    assert len(path.read_text(encoding="utf-8").splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        pytest.param(["diameter", "--p", "4"], id="composite prime"),
        pytest.param(["diameter", "--p", "2"], id="even prime"),
        pytest.param(["diameter"], id="no prime"),
        pytest.param(["diameter", "--p", "5", "--p-range", "5:7"], id="prime and range"),
        pytest.param(["diameter", "--p-range", "24:28"], id="range without primes"),
        pytest.param(["diameter", "--p-range", "11:5"], id="unordered range"),
        pytest.param(["diameter", "--p", "5", "--trials", "0"], id="no trials"),
        pytest.param(["diameter", "--p", "5", "--gens", "1,1;0,2"], id="determinant 2"),
        pytest.param(["diameter", "--p", "five"], id="not a number"),
        pytest.param(["fixtures", "--p", "3"], id="fixtures below 5"),
        pytest.param(["factorize"], id="missing required"),
        pytest.param(["freewords", "--p", "11", "--gens", "random"], id="random integer generators"),
        pytest.param(["sumproduct", "--p", "5", "--size", "5"], id="subset too large"),
        pytest.param(["diameter", "--p", "5", "--format", "xml"], id="unknown format"),
        pytest.param(["nope"], id="unknown command"),
        pytest.param([], id="no command"),
    ],
)
def test_usage_errors(lab, capsys, argv):
    code, out = run_lab(lab, capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""


def test_version(lab, capsys):
    code, out = run_lab(lab, capsys, "--version")
    assert code == EXIT_OK
    assert out.strip() == "sl2lab 0.1.0"


@pytest.mark.parametrize(
    "error",
    [
        pytest.param(DomainError("zero has no inverse"), id="domain"),
        pytest.param(ImplementationBugError("broken invariant", witness=[1, 2]), id="bug"),
    ],
)
def test_failure_exit_code(capsys, error):
    lab = Lab(title="test")

    @lab.command()
    def broken() -> list[CayleyRecord]:
        raise error

    code, out = run_lab(lab, capsys, "broken")
    assert code == EXIT_FAILURE
    assert out == ""


def test_sumproduct(lab, capsys):
    code, out = run_lab(lab, capsys, "sumproduct", "--p", "7", "--size", "3", "--trials", "2")
    assert code == EXIT_OK
    _, *records, summary = json_lines(out)
    assert [record["trial"] for record in records] == [0, 1]
    assert all(record["ruzsa"]["passed"] for record in records)
    assert summary["records"] == 2
    assert summary["failures"] == 0


def test_fixtures(lab, capsys):
    code, out = run_lab(lab, capsys, "fixtures", "--p", "5", "--kind", "subgroup_plus_point")
    assert code == EXIT_OK
    _, record, summary = json_lines(out)
    assert record["kind"] == "subgroup_plus_point"
    assert record["furcht"]["passed"]
    assert summary["failures"] == 0


def test_freewords(lab, capsys):
    code, out = run_lab(lab, capsys, "freewords", "--p", "1009", "--max-len", "5", "--trials", "50")
    assert code == EXIT_OK
    _, record, summary = json_lines(out)
    assert record["report"]["violations"] == 0
    assert summary["failures"] == 0


def test_trials_are_reproducible(lab, capsys):
    _, first = run_lab(lab, capsys, "diameter", "--p", "11", "--gens", "random", "--trials", "3", "--seed", "9")
    _, second = run_lab(lab, capsys, "diameter", "--p", "11", "--gens", "random", "--trials", "3", "--seed", "9")
    assert first == second


@pytest.mark.slow
def test_diameter_sweep(lab, capsys):
    code, out = run_lab(lab, capsys, "diameter", "--p-range", "3:50")
    assert code == EXIT_OK
    *_, summary = json_lines(out)
    assert summary["records"] == 14
    assert summary["failures"] == 0


@pytest.mark.slow
def test_random_pairs_sweep(lab, capsys):
    code, out = run_lab(lab, capsys, "random-pairs", "--p-range", "20:40", "--trials", "20")
    assert code == EXIT_OK
    *_, summary = json_lines(out)
    assert summary["records"] == 80
    assert summary["stats"]["p23_generating_fraction"] > 0.5
