"""CSV/JSON helpers shared by every writer and loader.

Files written by this package start with a stamp line
``# prestige-rank:<kind>:v<N>``.  Loaders accept unstamped files (raw
inputs) but reject a stamp whose kind or version does not match.
"""

import csv
import hashlib
import json
import math
from pathlib import Path

from .errors import CorpusParseError, SchemaVersionError

SCHEMA_VERSION = 1
STAMP_PREFIX = "# prestige-rank:"


def stamp(kind, version=SCHEMA_VERSION):
    return f"{STAMP_PREFIX}{kind}:v{version}"


def fmt_float(value):
    """17 significant digits; ``None``/NaN become the empty field."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".17g")


def parse_float(text):
    return None if text == "" else float(text)


def json_float(value):
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def check_stamp(line, kind, path):
    body = line[len(STAMP_PREFIX):].strip() if line.startswith(STAMP_PREFIX) else None
    if body != f"{kind}:v{SCHEMA_VERSION}":
        raise SchemaVersionError(
            f"{path}: expected schema {stamp(kind)!r}, found {line.strip()!r}"
        )


def read_rows(path, header, kind=None):
    """Yield ``(line_number, row_dict)`` after validating the header.

    ``header`` lists the required columns in order.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        offset = 1
        if first.startswith("#"):
            if kind is not None:
                check_stamp(first, kind, path)
            offset = 2
        else:
            fh.seek(0)
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise CorpusParseError(path, offset, "missing header row") from None
        columns = [c.strip() for c in columns]
        if columns[: len(header)] != list(header):
            raise CorpusParseError(
                path, offset, f"header {columns} does not start with {list(header)}"
            )
        for row in reader:
            lineno = offset + reader.line_num - 1
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(columns):
                raise CorpusParseError(
                    path, lineno, f"expected {len(columns)} fields, got {len(row)}"
                )
            yield lineno, dict(zip(columns, row))


def write_rows(path, kind, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(stamp(kind) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, kind, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema": stamp(kind)[2:], **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path, kind):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != stamp(kind)[2:]:
        raise SchemaVersionError(
            f"{path}: expected schema {stamp(kind)[2:]!r}, found {doc.get('schema')!r}"
        )
    return doc


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
