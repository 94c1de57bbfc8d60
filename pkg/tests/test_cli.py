import json

import pandas as pd
import pytest

from hamred import formats
from hamred.const import (
    EXIT_FAIL,
    EXIT_OK,
    EXIT_UNDETERMINED,
    EXIT_USAGE,
    FAILS,
    HOLDS,
    UNDETERMINED,
)
from hamred.hamred import RunReport, main, parse_subset
from hamred.utils import SchemaError

from .conftest import accept_all, accept_iff_first


@pytest.fixture
def workdir(tmp_path):
    formats.dump(accept_iff_first(), str(tmp_path / "verifier.json"))
    return tmp_path


def run(*args):
    return main([str(a) for a in args])


class TestRunReport:
    """
    Testing the mapping from verdicts to exit codes
    """

    def test_all_hold(self):
        report = RunReport("verify")
        report.add("a", True)
        report.add("b", HOLDS, 0.5)
        assert report.exit_code == EXIT_OK

    def test_failure_wins(self):
        report = RunReport("verify")
        report.add("a", UNDETERMINED)
        report.add("b", False)
        assert report.exit_code == EXIT_FAIL

    def test_undetermined(self):
        report = RunReport("verify")
        report.add("a", True)
        report.add("b", UNDETERMINED)
        assert report.exit_code == EXIT_UNDETERMINED

    def test_to_dict(self):
        report = RunReport("verify", {"subset": "0"})
        report.add("cover", FAILS, -0.25)
        data = report.to_dict()
        assert data["kind"] == "report"
        assert data["verdicts"] == [{"name": "cover", "status": FAILS, "margin": -0.25}]


class TestParseSubset:
    def test_parse(self):
        assert parse_subset("4, 0,3,3") == [0, 3, 4]

    @pytest.mark.parametrize("text", [None, ""])
    def test_empty(self, text):
        assert parse_subset(text) == []

    def test_garbage(self):
        with pytest.raises(SchemaError):
            parse_subset("0,x")


class TestCommands:
    """
    Testing the commands end to end on the toy verifier
    """

    def test_compile_and_spectrum(self, workdir):
        target = workdir / "h.json"
        assert run("compile", workdir / "verifier.json", "-o", target) == EXIT_OK
        data = json.loads(target.read_text())
        assert data["kind"] == "operator_sum"
        assert set(data["groups"]) >= {"h_in", "h_prop", "h_out"}
        table = workdir / "spectrum.csv"
        assert run("spectrum", target, "--k", 3, "--csv", table) == EXIT_OK
        assert len(pd.read_csv(table)) == 3

    def test_reduction_chain(self, workdir):
        qmw = workdir / "qmw.json"
        qssc = workdir / "qssc.json"
        report = workdir / "report.json"
        verifier = workdir / "verifier.json"
        assert run("reduce", "qmw", verifier, "--g", 1, "--g-prime", 2, "-o", qmw) == EXIT_OK
        assert run("verify", qmw) == EXIT_OK
        assert run("reduce", "qssc", qmw, "-o", qssc) == EXIT_OK
        assert formats.load(str(qssc), ["qssc"]).g == 3
        assert run("verify", qssc, "--subset", "0,3,4", "--report", report) == EXIT_OK
        verdicts = {v["name"]: v["status"] for v in json.loads(report.read_text())["verdicts"]}
        assert verdicts["cover"] == HOLDS
        assert run("verify", qssc, "--subset", "0,3") == EXIT_FAIL

    def test_tree_instance_verifies_but_is_too_large(self, tmp_path, small_tree):
        verifier, tree = tmp_path / "verifier.json", tmp_path / "tree.json"
        qmw = tmp_path / "qmw.json"
        formats.dump(accept_all(), str(verifier))
        formats.dump(small_tree, str(tree))
        assert run("reduce", "qmw", verifier, "--tree", tree, "-o", qmw) == EXIT_OK
        assert run("verify", qmw) == EXIT_OK
        args = ["--dim-cap", 8192, "-o", tmp_path / "qssc.json"]
        assert run("reduce", "qssc", qmw, *args) == EXIT_USAGE
        assert not (tmp_path / "qssc.json").exists()

    def test_qmw_needs_thresholds(self, workdir):
        assert run("reduce", "qmw", workdir / "verifier.json") == EXIT_USAGE

    def test_disperser_find_and_verify(self, tmp_path):
        tree = tmp_path / "tree.json"
        args = ["--right", 4, "--degree", 2, "--k", 1]
        assert run("disperser", "find", "--depth", 1, *args, "-o", tree) == EXIT_OK
        assert formats.load(str(tree), ["encoding_tree"]).depth == 1
        assert run("disperser", "verify", tree, "--k", 1) == EXIT_OK

    def test_unknown_reduction(self, workdir):
        with pytest.raises(SystemExit) as e:
            run("reduce", "bogus", workdir / "verifier.json")
        assert e.value.code == EXIT_USAGE

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"version": "hamred/0", "kind": "circuit"}))
        assert run("verify", path) == EXIT_USAGE

    def test_missing_input(self, tmp_path):
        assert run("verify", tmp_path / "absent.json") == EXIT_USAGE
