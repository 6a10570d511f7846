"""File formats for matrices, sweep results, and analysis reports.

Matrices travel either as text CSV (one matrix row per line, complex
entries rendered ``a+bi``) or as a compact binary format with a 16-byte
header: magic ``PCSM``, version (u16), dtype code (u16; 0 = float64,
1 = complex128), then row and column counts (u32 each), all little
endian, followed by the C-order payload.  Floats are written with 17
significant digits everywhere so text round-trips are exact.
"""

from __future__ import annotations

import csv
import io
import struct

import numpy as np

__all__ = [
    "FORMAT_VERSION",
    "load_matrix",
    "load_matrix_csv",
    "save_matrix",
    "save_matrix_csv",
    "format_report",
    "parse_report",
]

MAGIC = b"PCSM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHII")
_DTYPES = {0: np.float64, 1: np.complex128}
_DTYPE_CODES = {np.dtype(np.float64): 0, np.dtype(np.complex128): 1}


def _format_scalar(v) -> str:
    if np.iscomplexobj(v):
        re, im = float(np.real(v)), float(np.imag(v))
        sign = "+" if im >= 0 or np.isnan(im) else "-"
        return f"{re:.17g}{sign}{abs(im):.17g}i"
    return f"{float(v):.17g}"


def _parse_scalar(token: str):
    token = token.strip()
    if token.endswith("i"):
        return complex(token[:-1].replace("i", "j") + "j")
    return float(token)


def save_matrix_csv(path: str, mat: np.ndarray) -> None:
    """Write a matrix (or a vector, as one row) to CSV text."""
    mat = np.atleast_2d(np.asarray(mat))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in mat:
            writer.writerow([_format_scalar(v) for v in row])


def load_matrix_csv(path: str) -> np.ndarray:
    """Read a CSV matrix; entries containing ``i`` parse as complex."""
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if record:
                rows.append([_parse_scalar(tok) for tok in record])
    if not rows:
        raise ValueError(f"no data rows in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in {path}")
    arr = np.array(rows)
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64)
    return arr


def save_matrix(path: str, mat: np.ndarray) -> None:
    """Write a matrix in the binary container (PCSM header + payload)."""
    mat = np.atleast_2d(np.asarray(mat))
    if np.iscomplexobj(mat):
        mat = mat.astype(np.complex128)
    else:
        mat = mat.astype(np.float64)
    code = _DTYPE_CODES[mat.dtype]
    m, n = mat.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, code, m, n))
        fh.write(np.ascontiguousarray(mat).tobytes())


def load_matrix(path: str) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, code, m, n = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        if code not in _DTYPES:
            raise ValueError(f"{path}: unknown dtype code {code}")
        dtype = np.dtype(_DTYPES[code])
        payload = fh.read(m * n * dtype.itemsize)
    if len(payload) != m * n * dtype.itemsize:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype=dtype).reshape(m, n).copy()


def format_report(fields: dict) -> str:
    """Render a flat mapping as ``key = value`` lines (floats at 17 digits)."""
    lines = []
    for key, value in fields.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = f"{value:.17g}"
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Parse ``key = value`` lines back into a mapping.

    Values become bool, int, or float when they parse as such, otherwise
    they stay strings.  Inverse of :func:`format_report` for flat reports.
    """
    out: dict = {}
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, raw = line.partition("=")
        raw = raw.strip()
        if raw in ("true", "false"):
            out[key.strip()] = raw == "true"
            continue
        for cast in (int, float):
            try:
                out[key.strip()] = cast(raw)
                break
            except ValueError:
                continue
        else:
            out[key.strip()] = raw
    return out
