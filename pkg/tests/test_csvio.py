import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidres.csvio import CSVFormatError, read_table, write_table
from fidres.exceptions import DomainError


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_reads_header_and_floats(tmp_path):
    header, rows = read_table(write(tmp_path, "x, y\n1,2.5\n\n-3e2,4\n"))
    assert header == ["x", "y"]
    assert rows == [[1.0, 2.5], [-300.0, 4.0]]


@pytest.mark.parametrize("text,needle", [
    ("x,y\n1,2\n3\n", "row 3 has 1 fields"),
    ("x,y\n1,abc\n", "row 2, field 'y': cannot parse 'abc'"),
    ("x,y\n1,nan\n", "row 2, field 'y': value is not finite"),
    ("x,y\n", "no data rows"),
    ("", "empty file"),
])
def test_malformed(tmp_path, text, needle):
    with pytest.raises(CSVFormatError, match=needle.replace("(", r"\(")):
        read_table(write(tmp_path, text))


def test_too_few_columns(tmp_path):
    with pytest.raises(CSVFormatError, match="need 2"):
        read_table(write(tmp_path, "x\n1\n"), min_columns=2)


def test_missing_file(tmp_path):
    with pytest.raises(CSVFormatError, match="cannot read"):
        read_table(tmp_path / "absent.csv")


def test_not_utf8(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_bytes(b"x\n\xff\xfe\n")
    with pytest.raises(CSVFormatError, match="UTF-8"):
        read_table(path)


def test_error_is_domain_error():
    assert issubclass(CSVFormatError, DomainError)


@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3,
                         max_size=3), min_size=1, max_size=20))
@settings(max_examples=100, deadline=None)
def test_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_table(path, ["a", "b", "c"], rows)
    header, parsed = read_table(path)
    assert header == ["a", "b", "c"] and parsed == rows
    write_table(path, header, parsed)
    assert read_table(path) == (header, parsed)


def test_write_to_stream():
    buf = io.StringIO()
    write_table(buf, ["name", "v"], [["geo", 0.1]])
    assert buf.getvalue() == "name,v\ngeo,0.1\n"
