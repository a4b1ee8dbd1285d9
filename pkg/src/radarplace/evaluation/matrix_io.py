"""Binary matrix files.

``RPEM``: 4-byte magic, ``u32`` rows, ``u32`` cols, then row-major
little-endian ``float32``. ``RPEB``: same header, then one ``0``/``1`` byte
per entry.
"""

from __future__ import annotations

from pathlib import Path
from typing import Final

import numpy as np
import numpy.typing as npt

from radarplace.errors import DatasetError, DatasetFormatError

FLOAT_MAGIC: Final = b"RPEM"
BOOL_MAGIC: Final = b"RPEB"
_HEADER_BYTES: Final = 12
_U32_MAX: Final = 2**32 - 1


def _header(magic: bytes, shape: tuple[int, ...]) -> bytes:
    if len(shape) != 2:
        raise ValueError(f"Expected a 2-D matrix, got shape {shape!r}")
    if max(shape) > _U32_MAX:
        raise ValueError(f"Matrix too large for the format: {shape!r}")
    return magic + np.array(shape, dtype="<u4").tobytes()


def write_float_matrix(path: Path | str, matrix: npt.ArrayLike) -> Path:
    arr = np.asarray(matrix)
    target = Path(path)
    target.write_bytes(_header(FLOAT_MAGIC, arr.shape) + arr.astype("<f4").tobytes(order="C"))
    return target


def write_bool_matrix(path: Path | str, matrix: npt.ArrayLike) -> Path:
    arr = np.asarray(matrix, dtype=bool)
    target = Path(path)
    target.write_bytes(_header(BOOL_MAGIC, arr.shape) + arr.astype(np.uint8).tobytes(order="C"))
    return target


def _read(path: Path | str, magic: bytes, itemsize: int) -> tuple[bytes, int, int]:
    source = Path(path)
    if not source.is_file():
        raise DatasetError(f"Matrix file not found: {source}", source)
    raw = source.read_bytes()
    if len(raw) < _HEADER_BYTES or raw[:4] != magic:
        raise DatasetFormatError(f"{source}: expected {magic.decode()} header", source)
    rows, cols = (int(v) for v in np.frombuffer(raw, dtype="<u4", count=2, offset=4))
    body = raw[_HEADER_BYTES:]
    if len(body) != rows * cols * itemsize:
        raise DatasetFormatError(
            f"{source}: {len(body)} payload bytes for a {rows}x{cols} matrix", source
        )
    return body, rows, cols


def read_float_matrix(path: Path | str) -> npt.NDArray[np.float32]:
    body, rows, cols = _read(path, FLOAT_MAGIC, 4)
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float32)


def read_bool_matrix(path: Path | str) -> npt.NDArray[np.bool_]:
    body, rows, cols = _read(path, BOOL_MAGIC, 1)
    values = np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)
    if values.size and values.max() > 1:
        raise DatasetFormatError(f"{path}: boolean matrix holds values other than 0/1")
    return values.astype(bool)
