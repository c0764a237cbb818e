"""Time-domain parity-check band matrices.

One check row per time unit: the check at time t reads the parity bit of time
t plus, for every generator exponent e of stream i, the stream-i information
bit of time t-e.  Equivalently, the stream-i column of time unit t carries
ones at rows t+e.  Builders always emit every band coefficient, so a matrix
spanning T transmitted time units has T+m check rows; the trailing m rows are
the termination checks (no parity column of their own).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .csoc import StructuralError

ROLE_INFO = 0
ROLE_PARITY = 1

__all__ = [
    "BandMatrix",
    "TerminationInfo",
    "build_systematic_H",
    "build_nonsystematic_H",
    "build_band",
    "column_templates",
    "terminate",
    "termination_rate",
    "write_alist",
    "read_alist",
    "write_coord_csv",
    "read_coord_csv",
]


@dataclass(frozen=True)
class BandMatrix:
    """Sparse binary matrix with per-time-unit column blocks.

    ``ones`` is an (E, 2) array of (row, col) coordinates sorted row-major.
    ``cols_per_time`` counts columns per time unit and ``rows_per_time`` check
    rows per time unit (both scale with the lifting factor M).  ``memory`` is
    the code memory m in time units; ``band_width`` = m+1 column blocks is the
    reach of one check row.
    """

    rows: int
    cols: int
    ones: np.ndarray
    cols_per_time: int
    time_units: int
    memory: int
    col_roles: np.ndarray  # uint8 per column: ROLE_INFO / ROLE_PARITY
    rows_per_time: int = 1

    def __post_init__(self):
        ones = np.asarray(self.ones, dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((ones[:, 1], ones[:, 0]))
        ones = ones[order]
        if len(ones):
            if ones[:, 0].min() < 0 or ones[:, 0].max() >= self.rows:
                raise ValueError("row coordinate out of bounds")
            if ones[:, 1].min() < 0 or ones[:, 1].max() >= self.cols:
                raise ValueError("col coordinate out of bounds")
            if len(np.unique(ones[:, 0] * self.cols + ones[:, 1])) != len(ones):
                raise ValueError("duplicate coordinates")
        roles = np.asarray(self.col_roles, dtype=np.uint8)
        if roles.shape != (self.cols,):
            raise ValueError("col_roles must have one entry per column")
        ones.setflags(write=False)
        roles.setflags(write=False)
        object.__setattr__(self, "ones", ones)
        object.__setattr__(self, "col_roles", roles)

    @property
    def band_width(self) -> int:
        return self.memory + 1

    @property
    def num_ones(self) -> int:
        return len(self.ones)

    def to_csr(self, dtype=np.int8) -> sparse.csr_matrix:
        data = np.ones(len(self.ones), dtype=dtype)
        return sparse.csr_matrix(
            (data, (self.ones[:, 0], self.ones[:, 1])), shape=(self.rows, self.cols)
        )

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        out[self.ones[:, 0], self.ones[:, 1]] = 1
        return out

    def row_weights(self) -> np.ndarray:
        return np.bincount(self.ones[:, 0], minlength=self.rows)

    def col_weights(self) -> np.ndarray:
        return np.bincount(self.ones[:, 1], minlength=self.cols)

    def info_cols(self) -> np.ndarray:
        return np.flatnonzero(self.col_roles == ROLE_INFO)

    def parity_cols(self) -> np.ndarray:
        return np.flatnonzero(self.col_roles == ROLE_PARITY)

    def col_block(self, t: int) -> slice:
        """Column range of time unit t."""
        w = self.cols_per_time
        return slice(t * w, (t + 1) * w)

    def row_block(self, t: int) -> slice:
        w = self.rows_per_time
        return slice(t * w, (t + 1) * w)

    def restrict_rows(self, rows: int) -> "BandMatrix":
        """Drop check rows >= rows (e.g. the termination rows), keeping columns."""
        keep = self.ones[self.ones[:, 0] < rows]
        return BandMatrix(
            rows=rows,
            cols=self.cols,
            ones=keep.copy(),
            cols_per_time=self.cols_per_time,
            time_units=self.time_units,
            memory=self.memory,
            col_roles=self.col_roles.copy(),
            rows_per_time=self.rows_per_time,
        )


def build_band(col_exponents, col_roles, time_units: int) -> BandMatrix:
    """Materialize a band matrix from per-in-block-column exponent sets.

    Column (t, i) gets ones at rows t+e for e in col_exponents[i].  Rows run
    over all band coefficients: time_units + max-degree check rows.
    """
    if time_units < 1:
        raise ValueError("time_units must be >= 1")
    m = max(max(e) for e in col_exponents)
    w = len(col_exponents)
    coords = []
    for t in range(time_units):
        for i, exps in enumerate(col_exponents):
            c = t * w + i
            for e in exps:
                coords.append((t + e, c))
    ones = np.array(coords, dtype=np.int64)
    return BandMatrix(
        rows=time_units + m,
        cols=time_units * w,
        ones=ones,
        cols_per_time=w,
        time_units=time_units,
        memory=m,
        col_roles=np.tile(np.asarray(col_roles, dtype=np.uint8), time_units),
    )


def _systematic_templates(spec):
    exps = [g.exponents for g in spec.polys] + [(0,)]
    roles = [ROLE_INFO] * (spec.n - 1) + [ROLE_PARITY]
    return exps, roles


def _nonsystematic_templates(spec):
    if spec.n < 3:
        raise StructuralError(
            "dropping the parity column of an n=2 code would leave rate 0"
        )
    exps = [g.exponents for g in spec.polys]
    roles = [ROLE_INFO] * (spec.n - 2) + [ROLE_PARITY]
    return exps, roles


def build_systematic_H(spec, time_units: int) -> BandMatrix:
    """Parity-check band of the systematic code: n columns per time unit, the
    last being the degree-1 parity column."""
    exps, roles = _systematic_templates(spec)
    return build_band(exps, roles, time_units)


def build_nonsystematic_H(spec, time_units: int) -> BandMatrix:
    """Parity-check band with every parity column removed: n-1 columns per
    time unit, all of weight J, giving a (J, (n-1)J)-regular interior.

    The last column of each block is tagged as the parity position for
    recursive systematic encoding of the derived rate (n-2)/(n-1) code.
    """
    exps, roles = _nonsystematic_templates(spec)
    return build_band(exps, roles, time_units)


def column_templates(spec_or_proto, form: str):
    """(exponent sets, roles) for the requested matrix form."""
    from .lifting import EdgeSpreadProto

    if isinstance(spec_or_proto, EdgeSpreadProto):
        p = spec_or_proto
        exps = [tuple(range(p.J))] * p.n
        roles = [ROLE_INFO] * (p.n - 1) + [ROLE_PARITY]
        return exps, roles
    if form == "systematic":
        return _systematic_templates(spec_or_proto)
    if form == "nonsystematic":
        return _nonsystematic_templates(spec_or_proto)
    raise ValueError(f"unknown matrix form {form!r}")


@dataclass(frozen=True)
class TerminationInfo:
    """Bookkeeping for a band terminated after L transmitted time units."""

    L: int
    memory: int
    cols_per_time: int

    @property
    def total_checks(self) -> int:
        return self.L + self.memory

    @property
    def transmitted_bits(self) -> int:
        """Per lifting lane."""
        return self.L * self.cols_per_time

    @property
    def info_bits(self) -> int:
        """Per lifting lane: k*L minus the m termination constraints."""
        return (self.cols_per_time - 1) * self.L - self.memory

    @property
    def unterminated_rate(self) -> float:
        return (self.cols_per_time - 1) / self.cols_per_time

    @property
    def rate(self) -> float:
        return termination_rate(self.cols_per_time, self.memory, self.L)


def termination_rate(cols_per_time: int, memory: int, L: int) -> float:
    """Rate after termination: R_t = 1 - ((L+m)/L) * (1-R) for a band with a
    single parity stream, i.e. 1 - (L+m)/(L*n)."""
    return 1.0 - (L + memory) / (L * cols_per_time)


def terminate(spec_or_proto, L: int, form: str = "systematic"):
    """Band matrix covering L transmitted time units plus the m termination
    check rows, with its rate bookkeeping."""
    exps, roles = column_templates(spec_or_proto, form)
    mat = build_band(exps, roles, L)
    info = TerminationInfo(L=L, memory=mat.memory, cols_per_time=mat.cols_per_time)
    if info.info_bits <= 0:
        raise ValueError(
            f"L={L} leaves no information bits after {mat.memory} termination checks"
        )
    return mat, info


# ---------------------------------------------------------------------------
# interchange formats
# ---------------------------------------------------------------------------

def write_alist(matrix: BandMatrix, path=None) -> str:
    """Serialize to alist text.

    Layout: "rows cols", then "max_row_degree max_col_degree", the row degree
    list, the col degree list, then 1-based column indices per row and 1-based
    row indices per column.  Note the rows-first header (some alist writers
    put columns first).
    """
    rw = matrix.row_weights()
    cw = matrix.col_weights()
    buf = io.StringIO()
    buf.write(f"{matrix.rows} {matrix.cols}\n")
    buf.write(f"{int(rw.max(initial=0))} {int(cw.max(initial=0))}\n")
    buf.write(" ".join(str(int(x)) for x in rw) + "\n")
    buf.write(" ".join(str(int(x)) for x in cw) + "\n")
    csr = matrix.to_csr()
    for r in range(matrix.rows):
        cols = csr.indices[csr.indptr[r] : csr.indptr[r + 1]]
        # a lone 0 marks an empty row/column, per the usual alist padding
        line = " ".join(str(int(c) + 1) for c in np.sort(cols)) or "0"
        buf.write(line + "\n")
    csc = csr.tocsc()
    for c in range(matrix.cols):
        rows = csc.indices[csc.indptr[c] : csc.indptr[c + 1]]
        line = " ".join(str(int(r) + 1) for r in np.sort(rows)) or "0"
        buf.write(line + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_alist(source, cols_per_time: int = 1, time_units: int | None = None,
               memory: int = 0, col_roles=None, rows_per_time: int = 1) -> BandMatrix:
    """Parse alist text (path or string).  Band metadata is not part of the
    format, so callers may pass it; defaults treat each column as its own
    info-role time unit."""
    if isinstance(source, str) and "\n" not in source:
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols = (int(x) for x in lines[0].split())
    row_deg = [int(x) for x in lines[2].split()]
    if len(row_deg) != rows:
        raise ValueError("alist row degree list length mismatch")
    col_deg = [int(x) for x in lines[3].split()]
    if len(col_deg) != cols:
        raise ValueError("alist col degree list length mismatch")
    coords = []
    for r in range(rows):
        entries = [int(x) for x in lines[4 + r].split() if int(x) != 0]
        if len(entries) != row_deg[r]:
            raise ValueError(f"alist row {r} degree mismatch")
        for c in entries:
            coords.append((r, c - 1))
    ones = np.array(coords, dtype=np.int64).reshape(-1, 2)
    if col_roles is None:
        col_roles = np.zeros(cols, dtype=np.uint8)
    if time_units is None:
        time_units = cols // cols_per_time
    return BandMatrix(
        rows=rows,
        cols=cols,
        ones=ones,
        cols_per_time=cols_per_time,
        time_units=time_units,
        memory=memory,
        col_roles=col_roles,
        rows_per_time=rows_per_time,
    )


def write_coord_csv(matrix: BandMatrix, path=None) -> str:
    lines = ["row,col"] + [f"{int(r)},{int(c)}" for r, c in matrix.ones]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_coord_csv(source, rows: int | None = None, cols: int | None = None,
                   **band_meta) -> BandMatrix:
    if isinstance(source, str) and "\n" not in source:
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if lines[0] != "row,col":
        raise ValueError(f"expected header 'row,col', got {lines[0]!r}")
    coords = [tuple(int(x) for x in ln.split(",")) for ln in lines[1:]]
    ones = np.array(coords, dtype=np.int64).reshape(-1, 2)
    if rows is None:
        rows = int(ones[:, 0].max()) + 1 if len(ones) else 0
    if cols is None:
        cols = int(ones[:, 1].max()) + 1 if len(ones) else 0
    meta = dict(cols_per_time=1, time_units=cols, memory=0,
                col_roles=np.zeros(cols, dtype=np.uint8), rows_per_time=1)
    meta.update(band_meta)
    return BandMatrix(rows=rows, cols=cols, ones=ones, **meta)
