"""MatrixMarket coordinate files and plain-text complex vectors.

Files use 1-based indices. Hermitian files store the lower triangle only
(``i >= j``) and are expanded on read; ``general`` files store every entry.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .errors import ParseError, StructuralError
from .matrix import GeneralSparseMatrix, SparseHermitianMatrix, ZERO_CUTOFF

HEADER = "%%MatrixMarket matrix coordinate complex {symmetry}"


def file_digest(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def write_matrix(path, a: GeneralSparseMatrix, hermitian: bool | None = None) -> None:
    if hermitian is None:
        hermitian = a.hermitian_flag
    if a.scale != 1.0:
        a = GeneralSparseMatrix(a.dim, a.indptr, a.indices, a.data * a.scale)
    lines = []
    for i, row in enumerate(a.rows):
        for j, z in row:
            if hermitian and j > i:
                continue
            lines.append(f"{i + 1} {j + 1} {float(z.real)!r} {float(z.imag)!r}")
    with open(path, "w") as fh:
        fh.write(HEADER.format(symmetry="hermitian" if hermitian else "general") + "\n")
        fh.write(f"{a.dim} {a.dim} {len(lines)}\n")
        fh.write("\n".join(lines))
        if lines:
            fh.write("\n")


def read_matrix(path) -> GeneralSparseMatrix:
    """Parse a coordinate complex file.

    Returns a :class:`SparseHermitianMatrix` for ``hermitian`` files and a
    :class:`GeneralSparseMatrix` otherwise.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise ParseError(f"{path}: missing MatrixMarket header")
    obj, fmt, field, symmetry = (h.lower() for h in head[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"{path}: only 'matrix coordinate' files are supported")
    if field not in ("complex", "real"):
        raise ParseError(f"{path}: unsupported field {field!r}")
    if symmetry not in ("hermitian", "general", "symmetric"):
        raise ParseError(f"{path}: unsupported symmetry {symmetry!r}")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError(f"{path}: missing size line")
    try:
        nrows, ncols, nnz = (int(x) for x in body[0].split())
    except ValueError as exc:
        raise ParseError(f"{path}: bad size line {body[0]!r}") from exc
    if nrows != ncols:
        raise ParseError(f"{path}: matrix must be square")
    if len(body) - 1 != nnz:
        raise ParseError(f"{path}: expected {nnz} entries, found {len(body) - 1}")
    rows, cols, vals = [], [], []
    for ln in body[1:]:
        parts = ln.split()
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            re = float(parts[2])
            im = float(parts[3]) if field == "complex" else 0.0
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path}: bad entry line {ln!r}") from exc
        z = complex(re, im)
        if abs(z) < ZERO_CUTOFF:
            continue
        rows.append(i)
        cols.append(j)
        vals.append(z)
        if symmetry != "general" and i != j:
            if i < j:
                raise ParseError(f"{path}: {symmetry} files store only the lower triangle")
            rows.append(j)
            cols.append(i)
            vals.append(z.conjugate() if symmetry == "hermitian" else z)
    try:
        m = GeneralSparseMatrix.from_triplets(nrows, rows, cols, vals)
        if symmetry == "hermitian" or (symmetry == "symmetric" and all(v.imag == 0 for v in vals)):
            return SparseHermitianMatrix.from_general(m)
        return m
    except StructuralError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_vector(path, x) -> None:
    x = np.asarray(x, dtype=np.complex128)
    with open(path, "w") as fh:
        for z in x:
            fh.write(f"{float(z.real)!r} {float(z.imag)!r}\n")


def read_vector(path) -> np.ndarray:
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    out = np.empty(len(lines), dtype=np.complex128)
    for k, ln in enumerate(lines):
        parts = ln.split()
        try:
            if len(parts) == 1:
                out[k] = float(parts[0])
            elif len(parts) == 2:
                out[k] = complex(float(parts[0]), float(parts[1]))
            else:
                raise ValueError
        except ValueError as exc:
            raise ParseError(f"{path}: bad vector line {ln!r}") from exc
    if len(out) == 0:
        raise ParseError(f"{path}: empty vector")
    return out
