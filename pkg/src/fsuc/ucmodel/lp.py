"""A linear program container with metadata, built for block assembly.

Columns and rows are appended in chunks of numpy arrays so that large models
assemble without per-coefficient Python overhead.  Every column and row
carries a metadata tuple (kind, qualifiers...) from which stable names are
synthesized for exports and debugging.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

# Row senses.
SENSE_LE = 0  # row <= rhs
SENSE_EQ = 1  # row == rhs
SENSE_GE = 2  # row >= rhs

_SENSE_TEXT = {SENSE_LE: "<=", SENSE_EQ: "==", SENSE_GE: ">="}


def _as_float_array(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"expected array of length {n}, got {arr.shape}")
    return arr


class LinearProgram:
    """min obj @ x subject to row senses, rhs and column bounds."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self._ncols = 0
        self._nrows = 0
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._obj: list[np.ndarray] = []
        self._integer: list[np.ndarray] = []
        self._sense: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self._tri_row: list[np.ndarray] = []
        self._tri_col: list[np.ndarray] = []
        self._tri_val: list[np.ndarray] = []
        self.col_meta: list[tuple] = []
        self.row_meta: list[tuple] = []
        self._built = False

    # -- construction -------------------------------------------------------

    def add_cols(self, n: int, lb, ub, obj=0.0, integer: bool = False,
                 meta: Optional[Iterable[tuple]] = None) -> np.ndarray:
        """Append a block of n columns; returns their indices."""
        if self._built:
            raise RuntimeError("cannot add columns after finalize()")
        ids = np.arange(self._ncols, self._ncols + n)
        self._lb.append(_as_float_array(lb, n))
        self._ub.append(_as_float_array(ub, n))
        self._obj.append(_as_float_array(obj, n))
        self._integer.append(np.full(n, bool(integer)))
        if meta is None:
            self.col_meta.extend(("x", int(j)) for j in ids)
        else:
            metas = list(meta)
            if len(metas) != n:
                raise ValueError("metadata length mismatch")
            self.col_meta.extend(metas)
        self._ncols += n
        return ids

    def add_col(self, lb: float, ub: float, obj: float = 0.0,
                integer: bool = False, meta: Optional[tuple] = None) -> int:
        return int(self.add_cols(1, lb, ub, obj, integer,
                                 [meta] if meta is not None else None)[0])

    def add_rows(self, n: int, sense: int, rhs,
                 meta: Optional[Iterable[tuple]] = None) -> np.ndarray:
        """Append n empty rows of one sense; coefficients come via add_entries."""
        if self._built:
            raise RuntimeError("cannot add rows after finalize()")
        ids = np.arange(self._nrows, self._nrows + n)
        self._sense.append(np.full(n, int(sense), dtype=np.int8))
        self._rhs.append(_as_float_array(rhs, n))
        if meta is None:
            self.row_meta.extend(("row", int(i)) for i in ids)
        else:
            metas = list(meta)
            if len(metas) != n:
                raise ValueError("metadata length mismatch")
            self.row_meta.extend(metas)
        self._nrows += n
        return ids

    def add_entries(self, rows, cols, vals) -> None:
        """Append coefficient triplets (duplicates are summed)."""
        if self._built:
            raise RuntimeError("cannot add entries after finalize()")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        if rows.size == 0 or cols.size == 0:
            return
        n = max(rows.size, cols.size, vals.size)
        if rows.size == 1:
            rows = np.full(n, rows[0])
        if cols.size == 1:
            cols = np.full(n, cols[0])
        if vals.size == 1:
            vals = np.full(n, vals[0])
        if not (rows.size == cols.size == vals.size):
            raise ValueError("triplet arrays must have equal length")
        self._tri_row.append(rows)
        self._tri_col.append(cols)
        self._tri_val.append(vals)

    def add_row(self, sense: int, rhs: float, cols, vals,
                meta: Optional[tuple] = None) -> int:
        rid = int(self.add_rows(1, sense, rhs,
                                [meta] if meta is not None else None)[0])
        self.add_entries(np.full(len(np.atleast_1d(cols)), rid), cols, vals)
        return rid

    def finalize(self) -> "LinearProgram":
        """Freeze the structure into arrays; rhs/bounds stay mutable."""
        if self._built:
            return self

        def cat(chunks, dtype):
            if not chunks:
                return np.zeros(0, dtype=dtype)
            return np.concatenate(chunks).astype(dtype, copy=False)

        self.lb = cat(self._lb, float)
        self.ub = cat(self._ub, float)
        self.obj = cat(self._obj, float)
        self.integer = cat(self._integer, bool)
        self.sense = cat(self._sense, np.int8)
        self.rhs = cat(self._rhs, float)
        self.tri_row = cat(self._tri_row, np.int64)
        self.tri_col = cat(self._tri_col, np.int64)
        self.tri_val = cat(self._tri_val, float)
        self._built = True
        return self

    # -- access --------------------------------------------------------------

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def nrows(self) -> int:
        return self._nrows

    @property
    def nnz(self) -> int:
        if self._built:
            return int(self.tri_val.size)
        return int(sum(v.size for v in self._tri_val))

    @property
    def has_integers(self) -> bool:
        self.finalize()
        return bool(self.integer.any())

    def var_name(self, j: int) -> str:
        return "_".join(str(p) for p in self.col_meta[j])

    def row_name(self, i: int) -> str:
        return "_".join(str(p) for p in self.row_meta[i])

    # -- in-place data updates (structure fixed) -----------------------------

    def set_rhs(self, row_ids, values) -> None:
        self.finalize()
        self.rhs[np.asarray(row_ids, dtype=np.int64)] = values

    def set_col_bounds(self, col_ids, lb=None, ub=None) -> None:
        self.finalize()
        ids = np.asarray(col_ids, dtype=np.int64)
        if lb is not None:
            self.lb[ids] = lb
        if ub is not None:
            self.ub[ids] = ub

    # -- checks and conversions ----------------------------------------------

    def validate(self) -> list[str]:
        """Structural problems as human-readable strings; [] when clean."""
        self.finalize()
        issues = []
        bad = np.nonzero(self.lb > self.ub)[0]
        for j in bad[:10]:
            issues.append(f"column {self.var_name(j)}: lower bound exceeds upper")
        if self.tri_col.size:
            if self.tri_col.min() < 0 or self.tri_col.max() >= self._ncols:
                issues.append("coefficient references an undeclared column")
            if self.tri_row.min() < 0 or self.tri_row.max() >= self._nrows:
                issues.append("coefficient references an undeclared row")
        if len(self.col_meta) != self._ncols:
            issues.append("column metadata does not cover every column")
        if len(self.row_meta) != self._nrows:
            issues.append("row metadata does not cover every row")
        if not np.all(np.isfinite(self.tri_val)):
            issues.append("non-finite constraint coefficient")
        if not np.all(np.isfinite(self.rhs)):
            issues.append("non-finite right-hand side")
        if not np.all(np.isfinite(self.obj)):
            issues.append("non-finite objective coefficient")
        return issues

    def to_dense(self) -> np.ndarray:
        """Dense constraint matrix (small problems and tests only)."""
        self.finalize()
        a = np.zeros((self._nrows, self._ncols))
        np.add.at(a, (self.tri_row, self.tri_col), self.tri_val)
        return a

    def row_text(self, i: int) -> str:
        """Readable rendering of one row; debugging aid."""
        self.finalize()
        mask = self.tri_row == i
        terms = [f"{v:+g}*{self.var_name(c)}"
                 for c, v in zip(self.tri_col[mask], self.tri_val[mask])]
        return f"{' '.join(terms)} {_SENSE_TEXT[int(self.sense[i])]} {self.rhs[i]:g}"
