"""Free-format MPS export and import for LinearProgram instances.

Every column is declared through an explicit objective entry (zero if it
has no cost) so declaration order survives a round trip, and bounds are
always written out in full for integer columns to avoid the historical
[0, 1] default ambiguity.  RANGES sections are not supported.
"""

from __future__ import annotations

import numpy as np

from ..ucmodel.lp import LinearProgram, SENSE_EQ, SENSE_GE, SENSE_LE

_OBJ = "OBJ"
_SENSE_TAG = {SENSE_LE: "L", SENSE_EQ: "E", SENSE_GE: "G"}
_TAG_SENSE = {"L": SENSE_LE, "E": SENSE_EQ, "G": SENSE_GE}


def _clean(name: str, fallback: str) -> str:
    out = "".join(ch if ch.isalnum() or ch in "._-" else "." for ch in name)
    return out if out else fallback


def _unique_names(raw: list[str], prefix: str) -> list[str]:
    seen: dict[str, int] = {}
    names = []
    for i, r in enumerate(raw):
        name = _clean(r, f"{prefix}{i}")
        if name in seen:
            name = f"{name}.{i}"
        seen[name] = i
        names.append(name)
    return names


def _num(x: float) -> str:
    return format(x, ".17g")


def write_mps(lp: LinearProgram, path: str) -> None:
    lp.finalize()
    rows = _unique_names([lp.row_name(i) for i in range(lp.nrows)], "R")
    cols = _unique_names([lp.var_name(j) for j in range(lp.ncols)], "C")

    # Column-major traversal of the triplets (duplicates pre-summed).
    order = np.lexsort((lp.tri_row, lp.tri_col))
    by_col: dict[int, list[tuple[int, float]]] = {}
    for k in order:
        c, r, v = int(lp.tri_col[k]), int(lp.tri_row[k]), float(lp.tri_val[k])
        ents = by_col.setdefault(c, [])
        if ents and ents[-1][0] == r:
            ents[-1] = (r, ents[-1][1] + v)
        else:
            ents.append((r, v))

    lines = [f"NAME {_clean(lp.name, 'LP')}", "ROWS", f" N {_OBJ}"]
    for i in range(lp.nrows):
        lines.append(f" {_SENSE_TAG[int(lp.sense[i])]} {rows[i]}")

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j in range(lp.ncols):
        want_int = bool(lp.integer[j])
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            lines.append(f" M{marker} 'MARKER' '{tag}'")
            marker += 1
            in_int = want_int
        lines.append(f" {cols[j]} {_OBJ} {_num(lp.obj[j])}")
        for i, v in by_col.get(j, ()):
            lines.append(f" {cols[j]} {rows[i]} {_num(v)}")
    if in_int:
        lines.append(f" M{marker} 'MARKER' 'INTEND'")

    lines.append("RHS")
    for i in range(lp.nrows):
        if lp.rhs[i] != 0.0:
            lines.append(f" RHS {rows[i]} {_num(lp.rhs[i])}")

    lines.append("BOUNDS")
    for j in range(lp.ncols):
        lo, hi = lp.lb[j], lp.ub[j]
        explicit = bool(lp.integer[j])
        if lo == hi:
            lines.append(f" FX BND {cols[j]} {_num(lo)}")
            continue
        if not np.isfinite(lo) and not np.isfinite(hi):
            lines.append(f" FR BND {cols[j]}")
            continue
        if not np.isfinite(lo):
            lines.append(f" MI BND {cols[j]}")
        elif lo != 0.0 or explicit:
            lines.append(f" LO BND {cols[j]} {_num(lo)}")
        if np.isfinite(hi):
            lines.append(f" UP BND {cols[j]} {_num(hi)}")
        elif explicit:
            lines.append(f" PL BND {cols[j]}")

    lines.append("ENDATA")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mps(path: str) -> LinearProgram:
    with open(path, "r", encoding="ascii") as fh:
        raw = [ln.rstrip() for ln in fh]

    section = None
    name = "LP"
    obj_row = None
    row_order: list[tuple[str, str]] = []  # (tag, name)
    col_order: list[str] = []
    col_obj: dict[str, float] = {}
    col_entries: dict[str, list[tuple[str, float]]] = {}
    col_int: dict[str, bool] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[tuple[str, float]]] = {}
    in_int = False

    for ln in raw:
        if not ln or ln.lstrip().startswith("*"):
            continue
        toks = ln.split()
        head = toks[0].upper()
        if head in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA",
                    "RANGES", "OBJSENSE") and ln[0] not in " \t":
            if head == "NAME":
                name = toks[1] if len(toks) > 1 else "LP"
                continue
            if head == "RANGES":
                raise ValueError("RANGES sections are not supported")
            if head == "ENDATA":
                break
            section = head
            continue
        if section == "ROWS":
            tag, rname = toks[0].upper(), toks[1]
            if tag == "N":
                if obj_row is None:
                    obj_row = rname
                continue
            row_order.append((tag, rname))
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1].strip("'").upper() == "MARKER":
                in_int = toks[2].strip("'").upper() == "INTORG"
                continue
            cname = toks[0]
            if cname not in col_entries:
                col_order.append(cname)
                col_entries[cname] = []
                col_obj[cname] = 0.0
                col_int[cname] = in_int
            for k in range(1, len(toks) - 1, 2):
                rname, val = toks[k], float(toks[k + 1])
                if rname == obj_row:
                    col_obj[cname] += val
                else:
                    col_entries[cname].append((rname, val))
        elif section == "RHS":
            for k in range(1, len(toks) - 1, 2):
                rhs[toks[k]] = float(toks[k + 1])
        elif section == "BOUNDS":
            tag = toks[0].upper()
            cname = toks[2]
            val = float(toks[3]) if len(toks) > 3 else 0.0
            bounds.setdefault(cname, []).append((tag, val))

    lp = LinearProgram(name=name)
    col_ids: dict[str, int] = {}
    for cname in col_order:
        lo, hi = 0.0, np.inf
        for tag, val in bounds.get(cname, []):
            if tag == "UP":
                hi = val
                if val < 0 and lo == 0.0:
                    lo = -np.inf
            elif tag == "LO":
                lo = val
            elif tag == "FX":
                lo = hi = val
            elif tag == "FR":
                lo, hi = -np.inf, np.inf
            elif tag == "MI":
                lo = -np.inf
            elif tag == "PL":
                hi = np.inf
            elif tag == "BV":
                lo, hi = 0.0, 1.0
                col_int[cname] = True
            else:
                raise ValueError(f"unsupported bound tag {tag}")
        col_ids[cname] = lp.add_col(lo, hi, col_obj[cname],
                                    integer=col_int[cname], meta=(cname,))

    for tag, rname in row_order:
        lp.add_rows(1, _TAG_SENSE[tag], rhs.get(rname, 0.0), [(rname,)])
    row_ids = {rname: i for i, (_, rname) in enumerate(row_order)}

    for cname in col_order:
        for rname, val in col_entries[cname]:
            lp.add_entries([row_ids[rname]], [col_ids[cname]], [val])

    lp.finalize()
    return lp
