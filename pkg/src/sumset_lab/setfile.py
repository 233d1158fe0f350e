"""Text serialisation of TensorSets.

::

    alphabet <|X|>
    n <n>
    indices            | hexbits
    <index per line>   | <hex string>

``hexbits`` packs the bitset little-endian: byte ``k`` holds point indices
``8k .. 8k+7`` with index ``8k`` in its lowest bit, and bytes are written in
increasing ``k``.  Padding bits past ``|X|^n`` must be zero.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .tensor_sets import TensorSet, _check_size

FORMATS = ("indices", "hexbits")


def dumps(E: TensorSet, fmt: str = "indices") -> str:
    lines = [f"alphabet {E.alphabet_size}", f"n {E.n}", fmt]
    if fmt == "indices":
        lines.extend(str(int(i)) for i in E.indices())
    elif fmt == "hexbits":
        lines.append(np.packbits(E.bits, bitorder="little").tobytes().hex())
    else:
        raise InvalidInputError(f"unknown set format {fmt!r}")
    return "\n".join(lines) + "\n"


def _header_value(line: str, key: str) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise InvalidInputError(f"expected '{key} <int>', got {line!r}")
    try:
        return int(parts[1])
    except ValueError as exc:
        raise InvalidInputError(f"bad integer in {line!r}") from exc


def loads(text: str) -> TensorSet:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 3:
        raise InvalidInputError("set file needs alphabet, n and a format line")
    alphabet = _header_value(lines[0], "alphabet")
    n = _header_value(lines[1], "n")
    try:
        size = _check_size(alphabet, n)
    except ValueError as exc:
        raise InvalidInputError(str(exc)) from exc
    fmt, body = lines[2], lines[3:]
    if fmt == "indices":
        try:
            idx = [int(s) for s in body]
        except ValueError as exc:
            raise InvalidInputError("non-integer point index") from exc
        return TensorSet.from_indices(alphabet, n, idx)
    if fmt == "hexbits":
        try:
            raw = bytes.fromhex("".join(body))
        except ValueError as exc:
            raise InvalidInputError("malformed hex bitset") from exc
        if len(raw) != (size + 7) // 8:
            raise InvalidInputError(f"hex bitset has {len(raw)} bytes, expected {(size + 7) // 8}")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        if bits[size:].any():
            raise InvalidInputError("padding bits beyond |X|^n are set")
        return TensorSet(alphabet, n, bits[:size].astype(bool))
    raise InvalidInputError(f"unknown set format {fmt!r}")


def read_set_file(path) -> TensorSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def write_set_file(path, E: TensorSet, fmt: str = "indices") -> None:
    Path(path).write_text(dumps(E, fmt))
