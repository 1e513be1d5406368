"""MPS file ingestion: parse fixed/free dialects and canonicalize.

Rows are converted so that L rows are negated into >= rows, E rows become
equality rows, and RANGES entries expand into paired >= rows.  The objective
row's RHS, when present, is recorded as a reporting-only constant with the
usual sign convention (objective = c^T x - rhs_N).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import LpProblem, SparseMatrix


class MpsParseError(ValueError):
    """Malformed or unsupported MPS input."""


class MpsBoundConflictWarning(UserWarning):
    """A bound record overrode an earlier conflicting one (last writer wins)."""


# Fixed-format field windows, 0-indexed half-open column ranges.
_FIXED_FIELDS = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))

_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_VALUE_BOUND_CODES = {"UP", "LO", "FX"}
_FREE_BOUND_CODES = {"FR", "MI", "PL"}
_INTEGER_BOUND_CODES = {"BV", "LI", "UI"}


@dataclass
class MpsModel:
    """Structured MPS contents prior to canonicalization."""

    name: str = ""
    objective_row: str = ""
    rows: list[tuple[str, str]] = field(default_factory=list)  # (name, sense)
    columns: list[tuple[str, str, float]] = field(default_factory=list)  # (col, row, value)
    rhs: dict[str, float] = field(default_factory=dict)
    ranges: dict[str, float] = field(default_factory=dict)
    bounds: list[tuple[str, str, float | None]] = field(default_factory=list)  # (code, col, value)
    objective_constant: float = 0.0


def _significant_width(line: str) -> int:
    return len(line.rstrip())


def _conforms_to_fixed(line: str) -> bool:
    """True when every nonspace run sits alone inside one fixed field window."""
    if _significant_width(line) > _FIXED_FIELDS[-1][1]:
        return False
    runs = []
    start = None
    for i, ch in enumerate(line.rstrip("\n")):
        if ch != " " and ch != "\t":
            if start is None:
                start = i
        else:
            if start is not None:
                runs.append((start, i))
                start = None
    if start is not None:
        runs.append((start, len(line.rstrip("\n"))))
    occupied = set()
    for lo, hi in runs:
        holder = None
        for idx, (flo, fhi) in enumerate(_FIXED_FIELDS):
            if lo >= flo and hi <= fhi:
                holder = idx
                break
        if holder is None or holder in occupied:
            return False
        occupied.add(holder)
    return True


def _decode(source) -> list[str]:
    if isinstance(source, bytes):
        text = source.decode("latin-1")
    else:
        text = source
    return text.splitlines()


def parse_mps(source) -> MpsModel:
    """Parse MPS text or bytes into an MpsModel.

    The whitespace dialect is auto-detected: files whose data lines all fit
    the fixed column layout are sliced positionally, anything else is
    tokenized on whitespace.  Comment lines (leading '*') are skipped.
    Integrality markers and integer bound codes are rejected.
    """
    raw_lines = _decode(source)

    data_lines: list[tuple[int, str]] = []
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        data_lines.append((lineno, line))

    fixed_mode = all(
        _conforms_to_fixed(line) for _, line in data_lines if line[:1] in (" ", "\t")
    )

    def tokens_of(line: str) -> list[str]:
        if fixed_mode:
            fields = [line[lo:hi].strip() for lo, hi in _FIXED_FIELDS]
            return [f for f in fields if f]
        return line.split()

    model = MpsModel()
    row_sense: dict[str, str] = {}
    declared_columns: set[str] = set()
    section = None
    saw_endata = False

    for lineno, line in data_lines:
        if saw_endata:
            break
        if line[:1] not in (" ", "\t"):
            parts = line.split()
            keyword = parts[0]
            if keyword not in _SECTIONS:
                raise MpsParseError(f"line {lineno}: unknown section '{keyword}'")
            section = keyword
            if keyword == "NAME":
                model.name = parts[1] if len(parts) > 1 else ""
            elif keyword == "ENDATA":
                saw_endata = True
            continue

        if section is None:
            raise MpsParseError(f"line {lineno}: data before any section header")
        toks = tokens_of(line)
        if not toks:
            continue

        if section == "ROWS":
            if len(toks) != 2:
                raise MpsParseError(f"line {lineno}: malformed ROWS entry")
            sense, name = toks
            if sense not in ("N", "L", "G", "E"):
                raise MpsParseError(f"line {lineno}: unknown row sense '{sense}'")
            if name in row_sense:
                raise MpsParseError(f"line {lineno}: duplicate row '{name}'")
            if sense == "N":
                if model.objective_row:
                    raise MpsParseError(f"line {lineno}: multiple objective (N) rows")
                model.objective_row = name
            row_sense[name] = sense
            model.rows.append((name, sense))

        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1].strip("'") == "MARKER":
                qualifier = toks[2].strip("'") if len(toks) > 2 else ""
                if qualifier == "INTORG":
                    raise MpsParseError(f"line {lineno}: integer variables unsupported")
                continue  # INTEND or other markers are inert here
            if len(toks) < 3 or len(toks) % 2 == 0:
                raise MpsParseError(f"line {lineno}: malformed COLUMNS entry")
            col = toks[0]
            declared_columns.add(col)
            for i in range(1, len(toks), 2):
                row = toks[i]
                if row not in row_sense:
                    raise MpsParseError(
                        f"line {lineno}: row '{row}' referenced before declaration"
                    )
                model.columns.append((col, row, _parse_value(toks[i + 1], lineno)))

        elif section in ("RHS", "RANGES"):
            pairs = toks if len(toks) % 2 == 0 else toks[1:]
            if not pairs or len(pairs) % 2 != 0:
                raise MpsParseError(f"line {lineno}: malformed {section} entry")
            target = model.rhs if section == "RHS" else model.ranges
            for i in range(0, len(pairs), 2):
                row = pairs[i]
                if row not in row_sense:
                    raise MpsParseError(
                        f"line {lineno}: row '{row}' referenced before declaration"
                    )
                value = _parse_value(pairs[i + 1], lineno)
                if section == "RANGES" and row == model.objective_row:
                    raise MpsParseError(f"line {lineno}: RANGES entry on objective row")
                target[row] = value

        elif section == "BOUNDS":
            code = toks[0]
            if code in _INTEGER_BOUND_CODES:
                raise MpsParseError(f"line {lineno}: integer variables unsupported")
            if code in _VALUE_BOUND_CODES:
                if len(toks) == 4:
                    col, value = toks[2], _parse_value(toks[3], lineno)
                elif len(toks) == 3:
                    col, value = toks[1], _parse_value(toks[2], lineno)
                else:
                    raise MpsParseError(f"line {lineno}: malformed BOUNDS entry")
            elif code in _FREE_BOUND_CODES:
                if len(toks) == 3:
                    col = toks[2]
                elif len(toks) == 2:
                    col = toks[1]
                else:
                    raise MpsParseError(f"line {lineno}: malformed BOUNDS entry")
                value = None
            else:
                raise MpsParseError(f"line {lineno}: unknown bound code '{code}'")
            if col not in declared_columns:
                raise MpsParseError(
                    f"line {lineno}: column '{col}' referenced before declaration"
                )
            model.bounds.append((code, col, value))

        else:  # NAME or ENDATA carry no data lines
            raise MpsParseError(f"line {lineno}: unexpected data in section {section}")

    if not saw_endata:
        raise MpsParseError("missing ENDATA")
    if not model.objective_row:
        raise MpsParseError("no objective (N) row declared")

    if model.objective_row in model.rhs:
        model.objective_constant = -model.rhs[model.objective_row]

    return model


def _parse_value(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        try:  # Fortran-style exponents (1.5D+2) appear in old files
            return float(token.replace("D", "E").replace("d", "e"))
        except ValueError as exc:
            raise MpsParseError(f"line {lineno}: bad numeric value '{token}'") from exc


def read_mps(path) -> MpsModel:
    with open(path, "rb") as fh:
        return parse_mps(fh.read())


def to_standard_form(model: MpsModel) -> LpProblem:
    """Canonicalize an MpsModel into Gx >= h / Ax = b form.

    Ranged rows expand into a pair of >= rows (lower then negated upper);
    defaults are l=0, u=+inf with bound codes applied in file order.
    """
    col_order: list[str] = []
    col_index: dict[str, int] = {}
    for col, _row, _val in model.columns:
        if col not in col_index:
            col_index[col] = len(col_order)
            col_order.append(col)
    n = len(col_order)

    # Effective [lo, hi] interval per constraint row, in declaration order.
    c = np.zeros(n)
    row_entries: dict[str, list[tuple[int, float]]] = {name: [] for name, _ in model.rows}
    for col, row, val in model.columns:
        j = col_index[col]
        if row == model.objective_row:
            c[j] += val
        else:
            row_entries[row].append((j, val))

    g_rows: list[list[tuple[int, float]]] = []
    g_rhs: list[float] = []
    a_rows: list[list[tuple[int, float]]] = []
    a_rhs: list[float] = []

    for name, sense in model.rows:
        if sense == "N":
            continue
        rhs = model.rhs.get(name, 0.0)
        rng = model.ranges.get(name)
        if sense == "G":
            lo, hi = rhs, np.inf
            if rng is not None:
                hi = rhs + abs(rng)
        elif sense == "L":
            lo, hi = -np.inf, rhs
            if rng is not None:
                lo = rhs - abs(rng)
        else:  # E
            lo = hi = rhs
            if rng is not None:
                if rng >= 0:
                    hi = rhs + rng
                else:
                    lo = rhs - abs(rng)
        entries = row_entries[name]
        if lo == hi:
            a_rows.append(entries)
            a_rhs.append(lo)
            continue
        if np.isfinite(lo):
            g_rows.append(entries)
            g_rhs.append(lo)
        if np.isfinite(hi):
            g_rows.append([(j, -v) for j, v in entries])
            g_rhs.append(-hi)

    def build(rows: list[list[tuple[int, float]]]) -> SparseMatrix:
        ridx, cidx, vals = [], [], []
        for i, entries in enumerate(rows):
            for j, v in entries:
                ridx.append(i)
                cidx.append(j)
                vals.append(v)
        return SparseMatrix.from_coo(len(rows), n, np.array(ridx, dtype=np.int64),
                                     np.array(cidx, dtype=np.int64), np.array(vals))

    l = np.zeros(n)
    u = np.full(n, np.inf)
    explicitly_set: set[str] = set()
    for code, col, value in model.bounds:
        j = col_index[col]
        if code == "FX" and col in explicitly_set:
            warnings.warn(
                f"bound FX on '{col}' overrides an earlier UP/LO bound",
                MpsBoundConflictWarning,
                stacklevel=2,
            )
        if code == "LO":
            l[j] = value
            explicitly_set.add(col)
        elif code == "UP":
            u[j] = value
            explicitly_set.add(col)
        elif code == "FX":
            l[j] = u[j] = value
            explicitly_set.add(col)
        elif code == "FR":
            l[j], u[j] = -np.inf, np.inf
        elif code == "MI":
            l[j] = -np.inf
        elif code == "PL":
            u[j] = np.inf

    return LpProblem(
        c=c,
        G=build(g_rows),
        h=np.array(g_rhs),
        A=build(a_rows),
        b=np.array(a_rhs),
        l=l,
        u=u,
        name=model.name,
        objective_constant=model.objective_constant,
    )


def load_problem(path) -> LpProblem:
    """Read an MPS file and return the canonical problem."""
    return to_standard_form(read_mps(path))
