# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import os
import numpy as np
import scipy.io
import scipy.sparse
from supercur_utils import LOG
from .errors import ArgumentError, ParseError
from .matcore import as_mat

MAX_ENTRIES = 10**8
RAW_MAGIC = b"SCURMAT1"
RAW_HEADER = np.dtype([("magic", "S8"), ("m", "<u8"), ("n", "<u8"), ("field", "u1")])
_FIELD_TAGS = {0: np.dtype("<f8"), 1: np.dtype("<c16")}

def _check_dims(path, m, n):
    if m < 1 or n < 1:
        raise ParseError(f"invalid dimensions {m}x{n}", path)
    if m * n > MAX_ENTRIES:
        raise ParseError(f"{m}x{n} exceeds the dense limit of {MAX_ENTRIES} entries", path)

def is_raw(path):
    with open(path, "rb") as f:
        return f.read(len(RAW_MAGIC)) == RAW_MAGIC

def write_raw(path, W):
    W = as_mat(W)
    header = np.zeros((), dtype=RAW_HEADER)
    header["magic"] = RAW_MAGIC
    header["m"], header["n"] = W.shape
    header["field"] = int(np.iscomplexobj(W))
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(W, dtype=_FIELD_TAGS[int(header["field"])]).tobytes())

def read_raw(path):
    with open(path, "rb") as f:
        buf = f.read()
    if len(buf) < RAW_HEADER.itemsize:
        raise ParseError("truncated raw header", path)
    header = np.frombuffer(buf, dtype=RAW_HEADER, count=1)[0]
    if header["magic"] != RAW_MAGIC:
        raise ParseError("bad magic", path)
    m, n, tag = int(header["m"]), int(header["n"]), int(header["field"])
    _check_dims(path, m, n)
    if tag not in _FIELD_TAGS:
        raise ParseError(f"unknown field tag {tag}", path)
    dtype = _FIELD_TAGS[tag]
    body = buf[RAW_HEADER.itemsize:]
    if len(body) != m * n * dtype.itemsize:
        raise ParseError(f"expected {m*n} entries, found {len(body)//dtype.itemsize}", path)
    return as_mat(np.frombuffer(body, dtype=dtype).reshape(m, n).copy())

def _locate_mm_error(path):
    """Find the first malformed line of a Matrix Market file."""
    with open(path, "r", encoding="utf8", errors="replace") as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        return 1, "missing %%MatrixMarket banner"
    banner = lines[0].lower().split()
    if len(banner) != 5:
        return 1, "banner needs object, format, field and symmetry"
    fmt, field = banner[2], banner[3]
    ntok = {"real": 1, "integer": 1, "complex": 2, "pattern": 0}.get(field)
    if ntok is None:
        return 1, f"unknown field {field}"
    size = None
    count = 0
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        tokens = s.split()
        try:
            if size is None:
                size = [int(t) for t in tokens]
                if len(size) != (3 if fmt == "coordinate" else 2):
                    return lineno, "bad size line"
                continue
            vals = [float(t) for t in tokens]
        except ValueError:
            return lineno, f"cannot parse '{s}'"
        if fmt == "coordinate":
            if len(vals) != 2 + ntok:
                return lineno, f"expected {2+ntok} tokens, got {len(vals)}"
            i, j = int(vals[0]), int(vals[1])
            if not (1 <= i <= size[0] and 1 <= j <= size[1]):
                return lineno, f"entry ({i}, {j}) outside {size[0]}x{size[1]}"
        elif len(vals) != max(ntok, 1):
            return lineno, f"expected {max(ntok, 1)} tokens, got {len(vals)}"
        count += 1
    if size is None:
        return len(lines), "missing size line"
    expect = size[2] if fmt == "coordinate" else None
    if expect is not None and count != expect:
        return len(lines), f"expected {expect} entries, found {count}"
    return None, None

def read_matrix_market(path):
    try:
        m, n, _, fmt, field, symm = scipy.io.mminfo(path)
    except Exception as e:
        lineno, msg = _locate_mm_error(path)
        raise ParseError(msg or str(e), path, lineno) from e
    _check_dims(path, m, n)
    try:
        A = scipy.io.mmread(path)
    except Exception as e:
        lineno, msg = _locate_mm_error(path)
        raise ParseError(msg or str(e), path, lineno) from e
    if scipy.sparse.issparse(A):
        # coo -> dense sums duplicate coordinates
        A = A.tocoo().toarray()
    A = np.asarray(A)
    if field in ("integer", "pattern"):
        A = A.astype(np.float64)
    LOG.v(f"read {path}: {m}x{n} {fmt} {field} {symm}")
    return as_mat(A)

def write_matrix_market(path, W, format="array"):
    W = as_mat(W)
    if format == "coordinate":
        W = scipy.sparse.coo_matrix(W)
    elif format != "array":
        raise ArgumentError(f"Unknown Matrix Market format: {format}")
    scipy.io.mmwrite(path, W, precision=17)
    # scipy appends .mtx when the name has no extension
    if not os.path.exists(path) and os.path.exists(path + ".mtx"):
        os.replace(path + ".mtx", path)

def load_matrix(path):
    """Dense matrix from a Matrix Market or raw binary file."""
    if not os.path.isfile(path):
        raise ArgumentError(f"No such file: {path}")
    if is_raw(path):
        return read_raw(path)
    return read_matrix_market(path)

def save_matrix(path, W, format=None):
    """``format`` is one of raw, array, coordinate; default from the suffix."""
    if format is None:
        format = "raw" if path.endswith((".bin", ".raw")) else "array"
    if format == "raw":
        write_raw(path, W)
    else:
        write_matrix_market(path, W, format)
