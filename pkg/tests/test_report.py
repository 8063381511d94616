import math

import pytest

from smoothlab.experiments import FLAG_VIOLATION, make_row
from smoothlab.report import COLUMNS, read_rows, report_emit

ROWS = [
    make_row("equiv_2_3", "abs_sin", "inf", 16, 0.01, 0.03),
    make_row("equiv_2_3", "abs_sin", "2", 8, 1.0 / 3.0, 0.1),
    make_row("equiv_2_3", "abs_sin", "2", 16, 0.1, 0.05, FLAG_VIOLATION),
    make_row("equiv_2_3", "constant", "2", 8, 0.0, 0.0),
]


def test_csv_round_trip(tmp_path):
    path = report_emit(ROWS, tmp_path / "rows.csv")
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == ",".join(COLUMNS)
    back = read_rows(path)
    assert [(r.function, r.p, r.param) for r in back] == [
        ("abs_sin", "2", 8.0),
        ("abs_sin", "2", 16.0),
        ("abs_sin", "inf", 16.0),
        ("constant", "2", 8.0),
    ]
    assert back[0].ratio == pytest.approx(10.0 / 3.0, rel=1e-12)
    assert back[1].flag == FLAG_VIOLATION
    assert back[0].flag == ""
    assert math.isnan(back[3].ratio)
    assert back[3].flag == "excluded"


def test_csv_is_deterministic(tmp_path):
    a = report_emit(ROWS, tmp_path / "a.csv").read_bytes()
    b = report_emit(list(reversed(ROWS)), tmp_path / "b.csv").read_bytes()
    assert a == b
    assert b"\r\n" not in a


def test_plotdata_blocks(tmp_path):
    text = report_emit(ROWS, tmp_path / "plot.txt", "plotdata").read_text(encoding="utf-8")
    assert "# equiv_2_3 abs_sin p=2 lhs" in text
    assert "# equiv_2_3 constant p=2 rhs" in text
    block = text.split("# equiv_2_3 abs_sin p=2 rhs\n")[1].split("\n\n")[0].splitlines()
    x, y = (float(v) for v in block[0].split())
    assert x == pytest.approx(math.log10(8))
    assert y == pytest.approx(-1.0)
    # zero values have no logarithm
    assert "# equiv_2_3 constant p=2 lhs\n\n# equiv_2_3 constant p=2 rhs" in text


def test_report_rejects_empty_rows_and_unknown_formats(tmp_path):
    with pytest.raises(ValueError):
        report_emit([], tmp_path / "rows.csv")
    with pytest.raises(ValueError):
        report_emit(ROWS, tmp_path / "rows.xlsx", "xlsx")


def test_read_rows_needs_every_column(tmp_path):
    path = tmp_path / "partial.csv"
    path.write_text("experiment,function,p\nequiv_2_3,abs_sin,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_rows(path)
