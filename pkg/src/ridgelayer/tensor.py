"""Dense float64 arrays, SPD solves and the RLT1 tensor file format.

Matrices and vectors are plain C-contiguous ``numpy.float64`` arrays of rank
2 and 1. The helpers here validate them at module boundaries so the rest of
the package can assume clean inputs.
"""

import os
import struct

import numpy as np
from scipy import linalg

from .errors import ContractViolation, FormatError, SingularSystem

MAGIC = b"RLT1"
DTYPE_F64 = 0
_HEADER = struct.Struct("<4sBB")


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite, C-contiguous float64 matrix."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ContractViolation(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Return ``v`` as a finite, contiguous float64 vector."""
    x = np.ascontiguousarray(v, dtype=np.float64)
    if x.ndim != 1:
        raise ContractViolation(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ContractViolation(f"{name} contains non-finite entries")
    return x


def matmul(a, b):
    """Matrix product of two 2-D arrays with a dimension check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ContractViolation("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ContractViolation(
            f"matmul dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def spd_factor(a):
    """Cholesky-factor a symmetric positive definite matrix.

    Returns the ``(c, lower)`` pair understood by :func:`spd_solve_factored`.
    Only the lower triangle of ``a`` is read.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"expected a square matrix, got {a.shape}")
    try:
        return linalg.cho_factor(a, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularSystem(f"matrix is not positive definite: {exc}") from exc


def spd_solve_factored(factor, b):
    """Solve with a factorization from :func:`spd_factor`.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    return linalg.cho_solve(factor, b, check_finite=False)


def spd_solve(a, b):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    b = as_vector(b, "b")
    if np.shape(a)[0] != b.shape[0]:
        raise ContractViolation(
            f"spd_solve dimension mismatch: {np.shape(a)} vs {b.shape}")
    return spd_solve_factored(spd_factor(a), b)


def write_tensor(path, t):
    """Write a rank-1 or rank-2 float64 array in RLT1 format."""
    t = np.asarray(t)
    if t.ndim not in (1, 2):
        raise ContractViolation(f"only rank 1 or 2 tensors, got rank {t.ndim}")
    if t.dtype != np.float64:
        raise ContractViolation(f"only float64 tensors, got {t.dtype}")
    if not np.all(np.isfinite(t)):
        raise ContractViolation("refusing to write non-finite tensor")
    header = _HEADER.pack(MAGIC, DTYPE_F64, t.ndim)
    dims = struct.pack(f"<{t.ndim}Q", *t.shape)
    payload = np.ascontiguousarray(t).astype("<f8", copy=False).tobytes()
    with open(os.fspath(path), "wb") as fh:
        fh.write(header + dims + payload)


def decode_tensor(buf):
    """Decode RLT1 bytes into a float64 array."""
    if len(buf) < _HEADER.size:
        raise FormatError("truncated header", len(buf))
    magic, dtype, rank = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if dtype != DTYPE_F64:
        raise FormatError(f"unsupported dtype code {dtype}", 4)
    if rank not in (1, 2):
        raise FormatError(f"unsupported rank {rank}", 5)
    offset = _HEADER.size
    if len(buf) < offset + 8 * rank:
        raise FormatError("truncated dimensions", len(buf))
    shape = struct.unpack_from(f"<{rank}Q", buf, offset)
    offset += 8 * rank
    count = int(np.prod(shape, dtype=object))
    expected = offset + 8 * count
    if len(buf) < expected:
        raise FormatError(
            f"truncated payload: expected {count} values for shape {shape}",
            len(buf))
    if len(buf) > expected:
        raise FormatError("trailing bytes after payload", expected)
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=offset)
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        raise FormatError("non-finite value in payload", offset + 8 * int(bad[0]))
    return data.astype(np.float64).reshape(shape)


def read_tensor(path):
    """Read an RLT1 file written by :func:`write_tensor`."""
    with open(os.fspath(path), "rb") as fh:
        return decode_tensor(fh.read())
