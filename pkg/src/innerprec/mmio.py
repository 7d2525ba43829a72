"""Matrix Market exchange format (coordinate and array, real/integer/pattern)."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .sparse import SparseMatrix

_BANNER = "%%MatrixMarket"
_FORMATS = {"coordinate", "array"}
_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str
    format: str
    field: str
    symmetry: str


def _parse_banner(line: str) -> MatrixMarketHeader:
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0] != _BANNER:
        raise ValueError(f"malformed banner: {line.strip()!r}")
    _, obj, fmt, field, symmetry = (t.lower() for t in tokens)
    if obj != "matrix":
        raise ValueError(f"unsupported object {obj!r}")
    if fmt not in _FORMATS:
        raise ValueError(f"unsupported format {fmt!r}")
    if field not in _FIELDS:
        raise ValueError(f"unsupported field {field!r}")
    if symmetry not in _SYMMETRIES:
        raise ValueError(f"unsupported symmetry {symmetry!r}")
    if fmt == "array" and field == "pattern":
        raise ValueError("pattern field is invalid with array format")
    return MatrixMarketHeader(obj, fmt, field, symmetry)


def _data_lines(stream):
    for line in stream:
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        yield stripped


def _parse_value(token: str, field: str) -> float:
    try:
        return float(int(token)) if field == "integer" else float(token)
    except ValueError:
        raise ValueError(f"non-numeric value token {token!r}") from None


def mm_read(source) -> SparseMatrix:
    """Read a Matrix Market matrix from a string, text stream, or path.

    Symmetric storage is expanded to both triangles, pattern entries become
    1.0, indices are converted to 0-based, and duplicates are summed.
    """
    if hasattr(source, "read"):
        return _mm_read_stream(source)
    text = str(source)
    if text.lstrip().startswith(_BANNER):
        return _mm_read_stream(io.StringIO(text))
    with open(text) as fh:
        return _mm_read_stream(fh)


def _mm_read_stream(stream) -> SparseMatrix:
    header = _parse_banner(stream.readline())
    lines = _data_lines(stream)
    try:
        size_tokens = next(lines).split()
    except StopIteration:
        raise ValueError("missing size line") from None

    if header.format == "coordinate":
        if len(size_tokens) != 3:
            raise ValueError(f"coordinate size line needs 3 tokens, got {size_tokens}")
        nrows, ncols, nnz = (int(t) for t in size_tokens)
        rows, cols, vals = [], [], []
        for _ in range(nnz):
            try:
                tokens = next(lines).split()
            except StopIteration:
                raise ValueError("fewer entries than declared") from None
            expected = 2 if header.field == "pattern" else 3
            if len(tokens) != expected:
                raise ValueError(f"entry line has {len(tokens)} tokens, expected {expected}")
            i, j = int(tokens[0]) - 1, int(tokens[1]) - 1
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ValueError(
                    f"index ({i + 1}, {j + 1}) out of declared bounds {nrows}x{ncols}"
                )
            v = 1.0 if header.field == "pattern" else _parse_value(tokens[2], header.field)
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if header.symmetry == "symmetric" and i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)
        return SparseMatrix.from_coo(nrows, ncols, rows, cols, vals)

    # array format: dense column-major values
    if len(size_tokens) != 2:
        raise ValueError(f"array size line needs 2 tokens, got {size_tokens}")
    nrows, ncols = (int(t) for t in size_tokens)
    values = []
    for line in lines:
        values.extend(_parse_value(t, header.field) for t in line.split())
    if header.symmetry == "symmetric":
        if nrows != ncols:
            raise ValueError("symmetric array matrix must be square")
        expected = nrows * (nrows + 1) // 2
        if len(values) != expected:
            raise ValueError(f"expected {expected} stored values, got {len(values)}")
        dense = np.zeros((nrows, ncols))
        k = 0
        for j in range(ncols):
            for i in range(j, nrows):
                dense[i, j] = values[k]
                dense[j, i] = values[k]
                k += 1
    else:
        if len(values) != nrows * ncols:
            raise ValueError(f"expected {nrows * ncols} values, got {len(values)}")
        dense = np.asarray(values).reshape((ncols, nrows)).T
    return SparseMatrix.from_dense(dense)


def mm_write(a: SparseMatrix, symmetric: bool = False, comment: str | None = None) -> str:
    """Serialize to coordinate format with 17 significant digits.

    With ``symmetric=True`` only the lower triangle is stored; the input must
    satisfy max |A - A^T| <= 1e-12.
    """
    if symmetric:
        if a.nrows != a.ncols or a.max_asymmetry() > 1e-12:
            raise ValueError("symmetric flag set on asymmetric input")
        symmetry = "symmetric"
    else:
        symmetry = "general"
    out = [f"{_BANNER} matrix coordinate real {symmetry}"]
    if comment:
        out.extend(f"% {line}" for line in comment.splitlines())
    entries = []
    for i in range(a.nrows):
        for k in range(a.indptr[i], a.indptr[i + 1]):
            j = a.indices[k]
            if symmetric and j > i:
                continue
            entries.append(f"{i + 1} {j + 1} {a.data[k]:.16e}")
    out.append(f"{a.nrows} {a.ncols} {len(entries)}")
    out.extend(entries)
    return "\n".join(out) + "\n"


def read_rhs(source) -> np.ndarray:
    """Read a right-hand side: Matrix Market (auto-detected) or one value per line."""
    if hasattr(source, "read"):
        text = source.read()
    elif str(source).lstrip().startswith(_BANNER):
        text = str(source)
    else:
        with open(source) as fh:
            text = fh.read()
    if text.lstrip().startswith(_BANNER):
        mat = mm_read(io.StringIO(text))
        if mat.ncols != 1:
            raise ValueError(f"right-hand side must be a single column, got {mat.ncols}")
        return mat.to_dense()[:, 0]
    values = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("%") or stripped.startswith("#"):
            continue
        values.append(_parse_value(stripped.split()[0], "real"))
    if not values:
        raise ValueError("right-hand side file contains no values")
    return np.asarray(values)
