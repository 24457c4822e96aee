"""Numeric CSV tables: comma separated, one header row, UTF-8."""

import csv
import math

from .exceptions import DomainError


class CSVFormatError(DomainError):
    """A CSV file is unreadable or malformed; the message names the row and field."""


def read_table(path, min_columns=1):
    """Return ``(header, rows)`` with every data cell parsed as a float."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            records = list(csv.reader(fh))
    except OSError as exc:
        raise CSVFormatError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    except UnicodeDecodeError:
        raise CSVFormatError(f"{path}: not valid UTF-8") from None
    records = [rec for rec in records if any(cell.strip() for cell in rec)]
    if not records:
        raise CSVFormatError(f"{path}: empty file (expected a header row)")
    header = [h.strip() for h in records[0]]
    if len(header) < min_columns:
        raise CSVFormatError(f"{path}: header has {len(header)} columns, need {min_columns}")
    rows = []
    for lineno, rec in enumerate(records[1:], start=2):
        if len(rec) != len(header):
            raise CSVFormatError(
                f"{path}: row {lineno} has {len(rec)} fields, header has {len(header)}")
        row = []
        for name, cell in zip(header, rec):
            try:
                value = float(cell)
            except ValueError:
                raise CSVFormatError(
                    f"{path}: row {lineno}, field {name!r}: cannot parse {cell.strip()!r} "
                    "as a number") from None
            if not math.isfinite(value):
                raise CSVFormatError(f"{path}: row {lineno}, field {name!r}: value is not finite")
            row.append(value)
        rows.append(row)
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    return header, rows


def write_table(path_or_file, header, rows):
    """Write a table; floats use their shortest round-trip representation."""
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
