import pytest

from gam.cli import main
from gam.tables import TABLES, run_table


@pytest.mark.parametrize("table", sorted(TABLES))
def test_hr_columns(table):
    report = run_table(table, columns=("HR",))
    assert len(report.entries) == len(TABLES[table]["rows"])
    for e in report.entries:
        assert abs(e.delta) <= 0.02, e


def test_cli_output(capsys, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["tables", "--table", "1", "--columns", "hr", "--csv", str(out)]) == 0
    text = capsys.readouterr().out
    for ref in ("1.921", "3.440", "3.828"):
        assert ref in text
    assert out.read_text().count("\n") == 4


def test_cli_unknown_column():
    assert main(["tables", "--table", "2", "--columns", "G1"]) == 2


def test_lookup():
    report = run_table(1, columns=("HR",))
    assert report.get("HR", 15.0).published == 3.440
    with pytest.raises(KeyError):
        report.get("G2", 15.0)
