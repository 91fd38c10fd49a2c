"""Set-file I/O.

Text format: one header line ``box N1 N2 ... Nn`` followed by one line per
member ``x1 x2 ... xn`` (1-based coordinates), UTF-8 with LF line endings.

Binary format: the magic ``HOFA1`` and a newline, the same ASCII header line,
then the membership mask as a raw little-endian bitset of the box flattened
in row-major order (axis 1 slowest).  ``read_set`` sniffs the magic.
"""

from __future__ import annotations

import os
from typing import Union

import numpy as np

from .core import BoxSpec, SetIndicator

MAGIC = b"HOFA1"


class SetFileError(ValueError):
    pass


def _parse_header(line: str) -> BoxSpec:
    parts = line.split()
    if not parts or parts[0] != "box":
        raise SetFileError(f"bad header line: {line!r}")
    try:
        dims = [int(p) for p in parts[1:]]
    except ValueError as exc:
        raise SetFileError(f"bad header line: {line!r}") from exc
    if not dims:
        raise SetFileError("header lists no dimensions")
    return BoxSpec(dims)


def read_set(path: Union[str, os.PathLike]) -> SetIndicator:
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        fh.seek(0)
        if head == MAGIC:
            return _read_binary(fh)
        return _read_text(fh)


def _read_text(fh) -> SetIndicator:
    text = fh.read().decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SetFileError("empty set file")
    box = _parse_header(lines[0])
    mask = np.zeros(box.dims, dtype=bool)
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != box.n:
            raise SetFileError(f"member line has {len(parts)} coords, box has {box.n}")
        try:
            idx = tuple(int(p) - 1 for p in parts)
        except ValueError as exc:
            raise SetFileError(f"bad member line: {ln!r}") from exc
        if any(c < 0 or c >= d for c, d in zip(idx, box.dims)):
            raise SetFileError(f"member {ln!r} outside box {box}")
        mask[idx] = True
    return SetIndicator(box, mask)


def _read_binary(fh) -> SetIndicator:
    magic_line = fh.readline()
    if magic_line.rstrip(b"\n") != MAGIC:
        raise SetFileError("bad magic")
    box = _parse_header(fh.readline().decode("utf-8").rstrip("\n"))
    payload = fh.read()
    need = (box.cells + 7) // 8
    if len(payload) != need:
        raise SetFileError(f"bitset payload is {len(payload)} bytes, expected {need}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                         count=box.cells, bitorder="little")
    return SetIndicator(box, bits.astype(bool).reshape(box.dims))


def write_set(A: SetIndicator, path: Union[str, os.PathLike],
              binary: bool = False) -> None:
    if binary:
        _write_binary(A, path)
    else:
        _write_text(A, path)


def _write_text(A: SetIndicator, path) -> None:
    lines = ["box " + " ".join(str(d) for d in A.box.dims)]
    for pt in A.members():
        lines.append(" ".join(str(int(c)) for c in pt))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_binary(A: SetIndicator, path) -> None:
    header = "box " + " ".join(str(d) for d in A.box.dims)
    packed = np.packbits(A.mask.ravel(order="C"), bitorder="little")
    with open(path, "wb") as fh:
        fh.write(MAGIC + b"\n")
        fh.write(header.encode("utf-8") + b"\n")
        fh.write(packed.tobytes())
