import io
import json

import numpy as np
import pytest

from homogeneity import get_dataset, parse_table
from homogeneity.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def csv(tmp_path):
    def write(text, name="t.csv"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


class TestTest:
    def test_json_report(self):
        code, text = run("test", "--dataset", "mania2", "--m", "2000", "--seed", "3", "--json",
                         "--threads", "2")
        assert code == 0
        doc = json.loads(text)
        assert set(doc) == {"table", "model", "residuals", "results", "config", "seconds"}
        assert doc["table"]["col_labels"] == ["Divalproex", "Lithium", "Placebo"]
        assert [r["kind"] for r in doc["results"]] == ["chi2", "g2", "ft", "nll", "frobenius"]
        for r in doc["results"]:
            assert set(r) == {"kind", "observed", "exceedances", "m", "p_hat", "std_err", "seed"}
            assert r["m"] == 2000 and r["seed"] == 3
            assert r["p_hat"] == r["exceedances"] / 2000
            assert r["std_err"] == pytest.approx(np.sqrt(r["p_hat"] * (1 - r["p_hat"]) / 2000))

    def test_json_byte_identical_except_seconds(self):
        argv = ("test", "--dataset", "mania", "--m", "3000", "--seed", "5", "--threads", "2", "--json")
        a = json.loads(run(*argv)[1])
        b = json.loads(run(*argv)[1])
        a.pop("seconds"), b.pop("seconds")
        assert json.dumps(a) == json.dumps(b)

    def test_threads_do_not_change_counts(self):
        base = ("test", "--dataset", "mania2", "--m", "3000", "--json")
        one = json.loads(run(*base, "--threads", "1")[1])["results"]
        many = json.loads(run(*base, "--threads", "8")[1])["results"]
        assert [r["exceedances"] for r in one] == [r["exceedances"] for r in many]

    def test_homogeneous_table(self, csv):
        path = csv(",a,b\nx,2,4\ny,3,6\n")
        doc = json.loads(run("test", "--input", path, "--stats", "chi2", "--m", "1000", "--json")[1])
        assert doc["results"][0]["p_hat"] == 1.0

    def test_text_report(self):
        code, text = run("test", "--dataset", "danish", "--stats", "frobenius", "--stats", "cr:0.5",
                         "--m", "1000")
        assert code == 0
        assert "416 (33.1%)" in text
        assert "frobenius" in text and "cr:0.5" in text

    def test_transpose_and_unlabelled(self, csv):
        path = csv("1,2,3\n4,5,6\n")
        code, text = run("test", "--input", path, "--no-header", "--no-row-labels", "--transpose",
                         "--m", "100", "--json")
        assert code == 0
        assert json.loads(text)["table"]["counts"] == [[1, 4], [2, 5], [3, 6]]

    def test_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("1,0\n0,1\n"))
        code, text = run("exact", "--input", "-", "--no-header", "--no-row-labels", "--json")
        assert code == 0


class TestErrors:
    def test_parse_error(self, csv, capsys):
        assert run("test", "--input", csv("1,2\n3,x\n"), "--no-header", "--no-row-labels")[0] == 2
        assert "row 2, col 2" in capsys.readouterr().err

    def test_missing_file(self):
        assert run("residuals", "--input", "/no/such/file.csv")[0] == 2

    def test_validation_error(self, csv):
        assert run("test", "--input", csv("1,-1\n2,3\n"), "--no-header", "--no-row-labels")[0] == 3

    def test_unknown_dataset(self):
        assert run("residuals", "--dataset", "nope")[0] == 2

    def test_bad_stat(self):
        assert run("test", "--dataset", "danish", "--stats", "bogus", "--m", "10")[0] == 2

    def test_bad_m(self):
        assert run("test", "--dataset", "danish", "--m", "0")[0] == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            run("test")
        assert info.value.code == 2

    def test_resource_error(self, monkeypatch):
        def boom(*a, **k):
            raise MemoryError
        monkeypatch.setattr("homogeneity.cli.estimate_pvalues", boom)
        assert run("test", "--dataset", "danish", "--m", "10")[0] == 4


class TestResiduals:
    def test_danish_text(self):
        code, text = run("residuals", "--dataset", "danish")
        assert code == 0
        a_rows = [line.split() for line in text.splitlines() if line.startswith("A ")]
        assert a_rows[1][1] == "441.6" and a_rows[1][3] == "242.4"
        assert a_rows[2][1:] == ["-25.6", "25.6"]
        assert a_rows[3][1:] == ["-1.2", "1.6"]
        assert "-0.0 " not in text.split("Differences (observed")[1].split("Differences divided")[0].splitlines()[-1] + " "

    def test_republican_json(self):
        doc = json.loads(run("residuals", "--dataset", "republican", "--json")[1])
        np.testing.assert_allclose(doc["residuals"]["standardized"][-1], [2.1, -1.8], atol=0.05)

    def test_proportional(self, csv):
        doc = json.loads(run("residuals", "--input", csv(",a,b\nx,1,2\ny,3,6\n"), "--json")[1])
        assert doc["residuals"]["diff"] == [[0.0, 0.0], [0.0, 0.0]]

    def test_percentages_sum(self):
        doc = json.loads(run("residuals", "--dataset", "mania", "--json")[1])
        counts = np.array(doc["table"]["counts"])
        np.testing.assert_allclose((100 * counts / counts.sum(axis=0)).round(1).sum(axis=0), 100, atol=0.1 + 1e-9)


class TestExact:
    def test_tiny(self, csv):
        path = csv("1,0\n0,1\n", "tiny.csv")
        code, text = run("exact", "--input", path, "--no-header", "--no-row-labels", "--json")
        assert code == 0
        res = {r["kind"]: r for r in json.loads(text)["results"]}
        assert res["frobenius"]["p_value"] == pytest.approx(0.5)
        assert res["frobenius"]["outcomes"] == 4

    def test_homogeneous(self, csv):
        code, text = run("exact", "--input", csv("2,2\n3,3\n"), "--no-header", "--no-row-labels")
        assert code == 0
        assert "Exact P-values over" in text
        frob = [line for line in text.splitlines() if line.startswith("frobenius")][0]
        assert float(frob.split()[-1]) == pytest.approx(1.0)

    def test_budget_exceeded(self, capsys):
        assert run("exact", "--dataset", "danish")[0] == 5
        assert "outcomes" in capsys.readouterr().err

    def test_budget_flag(self, csv):
        assert run("exact", "--input", csv("1,1\n1,1\n"), "--no-header", "--no-row-labels",
                   "--budget", "8")[0] == 5


class TestDatasets:
    def test_list(self):
        code, text = run("datasets", "--list")
        assert code == 0
        assert [line.split()[0] for line in text.splitlines()] == ["danish", "mania", "republican", "mania2"]

    @pytest.mark.parametrize("name", ["danish", "mania", "republican", "mania2"])
    def test_emit_round_trip(self, name, csv):
        code, text = run("datasets", "--emit", name)
        assert code == 0
        assert parse_table(text, has_header=True, has_row_labels=True) == get_dataset(name).table
        # emit -> parse -> emit is a fixed point
        code, again = run("test", "--input", csv(text), "--m", "1", "--json")
        assert json.loads(again)["table"]["counts"] == get_dataset(name).table.counts.tolist()

    def test_emit_bogus(self):
        assert run("datasets", "--emit", "bogus")[0] == 2
