import json

import pytest

from levelspec import main
from levelspec.io_graph import read_csv

IDENTITY_5 = [["1" if i == j else "0" for j in range(5)] for i in range(5)]


def test_census_writes_csv(tmp_path, capsys):
    target = tmp_path / "census"
    main.main(["census", "--n-range", "3:5", "--out", str(target)])
    out = capsys.readouterr().out
    assert f"[census] wrote {target}.csv" in out
    rows = read_csv(f"{target}.csv")
    assert len(rows) == 1
    assert rows[0]["n"] == "5"
    assert rows[0]["generalized"] == "False"
    first_line = (tmp_path / "census.csv").read_text(encoding="utf-8").splitlines()[0]
    assert first_line.startswith("# generated_at=")


def test_enum_ortho_json_to_stdout(capsys):
    main.main(["enum-ortho", "--n", "3", "--level", "1", "--format", "json"])
    document = json.loads(capsys.readouterr().out)
    assert document["kind"] == "enum-ortho"
    assert document["rows"][0]["count"] == 48
    assert document["config"]["quotient"] is False


def test_guard_exceeded_exit_code(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main.main(["enum-ortho", "--n", "7", "--level", "1"])
    assert excinfo.value.code == 4
    assert "GuardExceededError" in capsys.readouterr().out


def test_guard_can_be_raised(capsys):
    main.main(
        [
            "enum-ortho",
            "--n",
            "7",
            "--level",
            "1",
            "--max-order",
            "7",
            "--quotient-signed-perms",
        ]
    )
    assert "7,1,level-divides,True,1,1," in capsys.readouterr().out


def test_precondition_exit_code(tmp_path, capsys):
    matrix = tmp_path / "identity.txt"
    matrix.write_text("1 0\n0 1\n", encoding="utf-8")
    with pytest.raises(SystemExit) as excinfo:
        main.main(["lemma-mc", "--matrix", str(matrix), "--trials", "3"])
    assert excinfo.value.code == 5


def test_format_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken", encoding="utf-8")
    with pytest.raises(SystemExit) as excinfo:
        main.main(["verify-certs", str(bad)])
    assert excinfo.value.code == 2


def test_missing_file_exit_code(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main.main(["verify-certs", str(tmp_path / "missing.json")])
    assert excinfo.value.code == 1


def test_failed_certificates_exit_with_claim_violation(tmp_path, capsys):
    doc = tmp_path / "certs.json"
    doc.write_text(
        json.dumps(
            {
                "certificates": [
                    {
                        "G": "DxK",
                        "H": "DxK",
                        "Q": IDENTITY_5,
                        "level": 2,
                        "generalized": False,
                    }
                ]
            }
        ),
        encoding="utf-8",
    )
    out = tmp_path / "report.csv"
    with pytest.raises(SystemExit) as excinfo:
        main.main(["verify-certs", str(doc), "--out", str(out)])
    assert excinfo.value.code == 6
    rows = read_csv(str(out))
    assert rows[0]["failures"] == "level;non-isomorphism"


def test_keyboard_interrupt(monkeypatch, capsys):
    def interrupted(_params):
        raise KeyboardInterrupt

    monkeypatch.setattr(main, "run_command", interrupted)
    with pytest.raises(SystemExit) as excinfo:
        main.main(["census", "--n", "3"])
    assert excinfo.value.code == 130
    assert "[interrupt]" in capsys.readouterr().out


def test_verbose_logging_goes_to_stderr(capsys):
    main.main(["sweep-controllability", "--n", "3", "--trials", "4", "--verbose"])
    captured = capsys.readouterr()
    assert "3,1/2,4,0,0" in captured.out
    assert "[sweep] n=3: 0/4 controllable" in captured.err
    assert "[trial-0] done" in captured.err
