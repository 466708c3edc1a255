import json
import subprocess
import sys

import pytest

from dolbeault_spectra.cli import main, parse_csv_rows, parse_range, ConfigError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("3") == (3, 3)
    assert parse_range("-2:2") == (-2, 2)
    with pytest.raises(ConfigError):
        parse_range("2:1")
    with pytest.raises(ConfigError):
        parse_range("a")


def test_spectrum_ground_family(capsys):
    code, out, _ = run(["spectrum", "--sphere", "s4", "--sector", "0", "--m", "0", "--s", "0", "--n-max", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [r["lambda"] for r in doc["rows"]] == [0.0, 4.0, 10.0]
    meta = doc["meta"]
    assert (meta["sphere"], meta["sector"], meta["twist"]) == ("s4", 0, 1)
    assert meta["tolerances"]["eigen_rel"] == 1e-8 and "tool_version" in meta
    row = doc["rows"][0]
    for k in ("labels", "n", "branch", "gamma", "delta", "alpha", "beta", "lambda", "degeneracy",
              "square_integrable", "regular_on_sphere", "independent_branch", "q_image_class", "admitted"):
        assert k in row


def test_spectrum_top_sector_s6(capsys):
    code, out, _ = run(["spectrum", "--sphere", "s6", "--sector", "3", "--p", "0", "--q", "0", "--n-max", "1"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    # Delta = 4, gamma = 1; the sector shift of 6 puts the bottom of the tower at 12
    assert rows[0]["lambda"] == 12.0 and rows[0]["delta"] == 4.0 and rows[0]["gamma"] == 1.0


def test_rows_sorted_and_deterministic(capsys):
    argv = ["spectrum", "--sphere", "s4", "--sector", "2", "--m=-2:2", "--s", "0:1", "--n-max", "2"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    rows = json.loads(a)["rows"]
    keys = [(r["lambda"], tuple(r["labels"].values()), r["n"], r["branch"]) for r in rows]
    assert keys == sorted(keys)
    assert all(r["admitted"] for r in rows)
    assert min(r["lambda"] for r in rows) >= 4


def test_all_branches_adds_rejected_rows(capsys):
    argv = ["spectrum", "--m", "1", "--s", "0", "--n-max", "1"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv + ["--all-branches"], capsys)
    assert len(json.loads(b)["rows"]) > len(json.loads(a)["rows"])
    assert any(not r["admitted"] for r in json.loads(b)["rows"])


def test_csv_round_trip(capsys, tmp_path):
    argv = ["spectrum", "--sphere", "s6", "--sector", "0", "--p", "0:2", "--q", "0:1", "--n-max", "2", "--all-branches"]
    _, js, _ = run(argv, capsys)
    out = tmp_path / "rows.csv"
    code, _, _ = run(argv + ["--format", "csv", "--out", str(out)], capsys)
    assert code == 0
    assert parse_csv_rows(out.read_text()) == json.loads(js)["rows"]


def test_text_format(capsys):
    code, out, _ = run(["spectrum", "--n-max", "1", "--format", "text"], capsys)
    assert code == 0 and out.splitlines()[0].split()[0] == "labels"


@pytest.mark.parametrize(
    "argv,kind",
    [
        (["spectrum", "--m", "2:1"], "empty_range"),
        (["spectrum", "--n-max", "-1"], "empty_range"),
        (["spectrum", "--sphere", "s6", "--sector", "1"], "unsupported_sector"),
        (["spectrum", "--sphere", "s6", "--sector", "2"], "unsupported_sector"),
        (["spectrum", "--sphere", "s4", "--sector", "1"], "unsupported_sector"),
        (["spectrum", "--sector", "7"], "invalid_config"),
        (["spectrum", "--s", "-1"], "invalid_config"),
        (["spectrum", "--sphere", "s4", "--p", "1"], "invalid_config"),
        (["spectrum", "--tolerance", "-1", "--verify"], "invalid_config"),
        (["spectrum", "--twist", "2"], "invalid_config"),
        (["spectrum", "--n-max", "3", "--grid", "4"], "invalid_config"),
        (["index", "--sphere", "s6", "--twist", "2"], "unsupported_twist"),
    ],
)
def test_invalid_configs_exit_2(argv, kind, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == kind


def test_unsupported_message_is_structured(capsys):
    _, _, err = run(["spectrum", "--sphere", "s6", "--sector", "1"], capsys)
    assert json.loads(err)["message"].startswith("unsupported:")


def test_spectrum_verify(capsys):
    code, _, err = run(["spectrum", "--m=-1:1", "--s", "0:1", "--n-max", "3", "--verify"], capsys)
    assert code == 0 and err == ""
    code, _, err = run(["spectrum", "--m", "0", "--n-max", "3", "--verify", "--tolerance", "1e-20"], capsys)
    assert code == 3
    assert json.loads(err.splitlines()[0])["passed"] is False


@pytest.mark.parametrize(
    "argv,expect",
    [
        (["index", "--sphere", "s4", "--twist", "1"], {"counting": 3, "geometry": 2, "discrepancy": 1}),
        (["index", "--sphere", "s4", "--twist", "2"], {"counting": 10, "geometry": 8}),
        (["index", "--sphere", "s4", "--twist", "-1"], {"counting": 3, "geometry": 2}),
        (["index", "--sphere", "s6", "--twist", "1"], {"counting": 10, "geometry": 4.5}),
    ],
)
def test_index_reports(argv, expect, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    doc = json.loads(out)
    for k, v in expect.items():
        assert doc[k] == v
    assert doc["meta"]["twist"] == int(argv[-1])


def test_index_text_and_csv(capsys):
    code, out, _ = run(["index", "--format", "text"], capsys)
    assert code == 0 and "discrepancy" in out
    code, out, _ = run(["index", "--format", "csv"], capsys)
    assert out.splitlines()[1].startswith("s4,1,3,2,2,1")


@pytest.mark.parametrize("suite", ["pairing", "identity", "zero-modes"])
def test_verify_suites_pass(suite, capsys):
    code, out, _ = run(["verify", suite], capsys)
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert recs and all(r["passed"] and r["suite"] == suite for r in recs)


def test_verify_forced_failure(capsys):
    code, out, err = run(["verify", "oracle", "--tolerance", "1e-20"], capsys)
    assert code == 1
    assert "FAILED" in err
    assert any(not json.loads(line)["passed"] for line in out.splitlines())


def test_thread_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("DOLBEAULT_SPECTRA_THREADS", "1")
    code, one, _ = run(["spectrum", "--m=-2:2", "--s", "0:2", "--n-max", "2"], capsys)
    monkeypatch.setenv("DOLBEAULT_SPECTRA_THREADS", "4")
    _, four, _ = run(["spectrum", "--m=-2:2", "--s", "0:2", "--n-max", "2"], capsys)
    assert code == 0 and one == four
    monkeypatch.setenv("DOLBEAULT_SPECTRA_THREADS", "many")
    code, _, _ = run(["spectrum"], capsys)
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dolbeault_spectra", "index"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["counting"] == 3
