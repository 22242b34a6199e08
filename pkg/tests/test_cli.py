import json

import pytest

from artifact.cli import FAILED, LIMIT, OK, USAGE, main
from artifact.workbench import load_fixture


@pytest.fixture
def family_file(tmp_path):
    def write(name):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(load_fixture(name).payload["input"]))
        return str(path)
    return write


def test_build_and_verify(tmp_path, family_file, capsys):
    out = tmp_path / "md.json"
    assert main(["build", family_file("family-b-z2-z4"), "-o", str(out)]) == OK
    assert "wrote" in capsys.readouterr().out
    assert main(["verify", str(out)]) == OK
    assert "verlinde" in capsys.readouterr().out


def test_verify_json_output(tmp_path, family_file, capsys):
    out = tmp_path / "md.json"
    main(["export", family_file("haagerup-rank12"), "-o", str(out)])
    capsys.readouterr()
    assert main(["verify", str(out), "--json"]) == OK
    data = json.loads(capsys.readouterr().out)
    assert data["ok"] and data["relations"]["ok"]


def test_rejected_input_exits_one(family_file, capsys):
    assert main(["build", family_file("family-d-z4-z5-rejected")]) == FAILED
    assert "K = Z2 x Z2" in capsys.readouterr().out


def test_broken_data_fails_verification(tmp_path, family_file):
    out = tmp_path / "md.json"
    main(["export", family_file("family-b-z2-z4"), "-o", str(out)])
    data = json.loads(out.read_text())
    data["T"][1] = "1/3"
    out.write_text(json.dumps(data))
    assert main(["verify", str(out)]) == FAILED


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["verify", str(bad)]) == USAGE
    assert "line 1" in capsys.readouterr().err
    assert main(["reproduce", "no-such-fixture"]) == USAGE
    assert main(["search", "--family", "A"]) == USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == USAGE


def test_resource_limit(capsys):
    assert main(["search", "--family", "A", "--first", "128", "--second", "3"]) == LIMIT
    assert "resource limit" in capsys.readouterr().err


def test_search_gauss_classify_reproduce(capsys):
    assert main(["search", "--family", "A", "--first", "5", "--second", "9", "--second", "3x3", "--json"]) == OK
    assert json.loads(capsys.readouterr().out)["count"] == 3
    assert main(["gauss", "--orders", "4", "--diag", "1/8", "--k-max", "2"]) == OK
    assert "exp(2 pi i 1/8)" in capsys.readouterr().out
    assert main(["classify", "--fixed", "z2", "--max-order", "8"]) == OK
    assert main(["reproduce", "family-a-z4"]) == OK
    assert main(["reproduce", "--list"]) == OK
    assert "haagerup-rank12" in capsys.readouterr().out
