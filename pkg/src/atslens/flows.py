"""Flow-log ingestion: parsing, validation and browser exclusion.

A flow log is either JSON-lines or CSV. Each well-formed line becomes a
:class:`FlowRecord`; malformed lines are collected as :class:`Reject`
entries so a run can report exactly what was dropped and why.
"""

from __future__ import annotations

import csv
import io
import ipaddress
import json
import re
from dataclasses import asdict, dataclass
from typing import Iterable, Literal, Sequence, TextIO

from ._io import Source, iter_plain_list, read_bytes

FlowFormat = Literal["jsonl", "csv"]

CSV_HEADER = ("app_id", "fqdn", "bytes_tx", "bytes_rx", "is_tls", "timestamp")

_APP_ID_RE = re.compile(r"^[A-Za-z0-9_]+(?:\.[A-Za-z0-9_-]+)+$")
_LABEL_RE = re.compile(r"^[a-z0-9_](?:[a-z0-9_-]{0,61}[a-z0-9_])?$")


class FlowLogError(Exception):
    """File-level failure: unreadable input or wrong CSV header."""


@dataclass(frozen=True)
class FlowRecord:
    app_id: str
    fqdn: str
    bytes_tx: int
    bytes_rx: int
    is_tls: bool
    timestamp: int | None = None


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str
    raw: str


def is_valid_app_id(app_id: str) -> bool:
    return bool(_APP_ID_RE.match(app_id))


def normalize_fqdn(fqdn: str) -> str:
    """Lowercase and strip surrounding whitespace and dots.

    Raises ValueError when the result is not a usable hostname, including
    bare IP addresses.
    """
    name = fqdn.strip().strip(".").lower()
    if not name:
        raise ValueError("empty fqdn")
    try:
        ipaddress.ip_address(name.strip("[]"))
    except ValueError:
        pass
    else:
        raise ValueError("fqdn is an IP address")
    if len(name) > 253 or not all(_LABEL_RE.match(label) for label in name.split(".")):
        raise ValueError("invalid hostname")
    return name


def _as_count(value: object, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{field} must be an integer")
    if value < 0:
        raise ValueError(f"{field} must be non-negative")
    return value


def _as_bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("true", "1", "yes"):
            return True
        if v in ("false", "0", "no"):
            return False
    raise ValueError("is_tls must be a boolean")


def _make_record(obj: dict) -> FlowRecord:
    app_id = obj.get("app_id")
    if not isinstance(app_id, str) or not is_valid_app_id(app_id.strip()):
        raise ValueError("invalid app_id")
    fqdn = obj.get("fqdn")
    if not isinstance(fqdn, str):
        raise ValueError("missing fqdn")
    for key in ("bytes_tx", "bytes_rx", "is_tls"):
        if key not in obj:
            raise ValueError(f"missing {key}")
    ts = obj.get("timestamp")
    if ts is not None:
        ts = _as_count(ts, "timestamp")
    return FlowRecord(
        app_id=app_id.strip(),
        fqdn=normalize_fqdn(fqdn),
        bytes_tx=_as_count(obj["bytes_tx"], "bytes_tx"),
        bytes_rx=_as_count(obj["bytes_rx"], "bytes_rx"),
        is_tls=_as_bool(obj["is_tls"]),
        timestamp=ts,
    )


def _parse_jsonl(text: str) -> tuple[list[FlowRecord], list[Reject]]:
    records, rejects = [], []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            records.append(_make_record(obj))
        except ValueError as exc:  # JSONDecodeError is a ValueError
            rejects.append(Reject(line_no, str(exc).splitlines()[0], line))
    return records, rejects


def _csv_int(value: str, field: str) -> int:
    value = value.strip()
    if not re.fullmatch(r"-?\d+", value):
        raise ValueError(f"{field} must be an integer")
    return int(value)


def _parse_csv(text: str) -> tuple[list[FlowRecord], list[Reject]]:
    if not text.strip():
        return [], []
    lines = text.splitlines(keepends=True)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except csv.Error as exc:
        raise FlowLogError(f"unreadable CSV header: {exc}") from exc
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise FlowLogError(f"wrong CSV header {header!r}, expected {','.join(CSV_HEADER)}")

    records, rejects = [], []
    while True:
        start = reader.line_num + 1
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raw = "".join(lines[start - 1 : reader.line_num]).rstrip("\r\n")
            rejects.append(Reject(start, f"csv error: {exc}", raw))
            continue
        raw = "".join(lines[start - 1 : reader.line_num]).rstrip("\r\n")
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"expected {len(CSV_HEADER)} fields, got {len(row)}")
            app_id, fqdn, tx, rx, tls, ts = row
            obj = {
                "app_id": app_id,
                "fqdn": fqdn,
                "bytes_tx": _csv_int(tx, "bytes_tx"),
                "bytes_rx": _csv_int(rx, "bytes_rx"),
                "is_tls": tls,
                "timestamp": _csv_int(ts, "timestamp") if ts.strip() else None,
            }
            records.append(_make_record(obj))
        except ValueError as exc:
            rejects.append(Reject(start, str(exc), raw))
    return records, rejects


def parse_flow_log(source: Source, fmt: FlowFormat = "jsonl") -> tuple[list[FlowRecord], list[Reject]]:
    """Parse a flow log into records and per-line rejects, preserving order."""
    try:
        text = read_bytes(source).decode("utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise FlowLogError(f"cannot read flow log: {exc}") from exc
    if fmt == "jsonl":
        return _parse_jsonl(text)
    if fmt == "csv":
        return _parse_csv(text)
    raise ValueError(f"unknown flow log format {fmt!r}")


def serialize_flow_log(records: Iterable[FlowRecord], fmt: FlowFormat = "jsonl") -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in records)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.app_id, r.fqdn, r.bytes_tx, r.bytes_rx,
                "true" if r.is_tls else "false",
                "" if r.timestamp is None else r.timestamp,
            ])
        return buf.getvalue()
    raise ValueError(f"unknown flow log format {fmt!r}")


def write_rejects(rejects: Iterable[Reject], fh: TextIO) -> None:
    for r in rejects:
        fh.write(json.dumps({"line_no": r.line_no, "reason": r.reason, "raw": r.raw}) + "\n")


def load_browser_list(source: Source) -> frozenset[str]:
    browsers = set()
    for line_no, entry in iter_plain_list(source):
        if not is_valid_app_id(entry):
            raise ValueError(f"line {line_no}: invalid app id {entry!r}")
        browsers.add(entry)
    return frozenset(browsers)


def filter_browsers(records: Sequence[FlowRecord], browsers: Iterable[str]) -> list[FlowRecord]:
    """Drop every record generated by a browser app."""
    excluded = frozenset(browsers)
    return [r for r in records if r.app_id not in excluded]
