"""Small input helpers shared by the loaders."""

from __future__ import annotations

import hashlib
import io
import os
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterator, Union

Source = Union[bytes, str, os.PathLike, BinaryIO]


def read_bytes(source: Source) -> bytes:
    """Return the raw bytes of a path, a bytes blob or a binary stream."""
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_bytes()
    data = source.read()
    if isinstance(data, str):
        return data.encode("utf-8")
    return data


def read_text(source: Source) -> str:
    return read_bytes(source).decode("utf-8-sig")


def iter_lines(source: Source) -> Iterator[tuple[int, str]]:
    """Yield ``(line_no, line)`` with 1-based numbers and line endings stripped."""
    for n, line in enumerate(io.StringIO(read_text(source)), start=1):
        yield n, line.rstrip("\r\n")


def iter_plain_list(source: Source) -> Iterator[tuple[int, str]]:
    """Lines of a one-entry-per-line file with ``#`` comments removed."""
    for n, line in iter_lines(source):
        entry = line.split("#", 1)[0].strip()
        if entry:
            yield n, entry


def data_path(name: str) -> Path:
    return Path(str(resources.files("atslens") / "data" / name))


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
