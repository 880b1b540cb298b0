"""Classical orthogonal arrays: generators, exhaustive checkers and conversion to QOAs."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .ffield import Field

DEFAULT_ROW_BUDGET = 2**20


def row_budget() -> int:
    """Maximum number of rows a generator may emit (``QOA_ROW_BUDGET`` overrides)."""
    raw = os.environ.get("QOA_ROW_BUDGET")
    if raw is None:
        return DEFAULT_ROW_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"QOA_ROW_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("QOA_ROW_BUDGET must be positive")
    return value


def _check_budget(rows: int) -> None:
    budget = row_budget()
    if rows > budget:
        raise ValueError(f"array would have {rows} rows, over the row budget of {budget}")


@dataclass(frozen=True, eq=False)
class OrthogonalArray:
    """An r x N array over ``range(d)`` with a declared strength.

    ``field`` is kept when the entries are element indices of a finite field.
    """

    rows: np.ndarray
    d: int
    strength: int
    field: Field | None = dc_field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if rows.size and (rows.min() < 0 or rows.max() >= self.d):
            raise ValueError(f"entries must lie in range({self.d})")
        if not 0 <= self.strength <= rows.shape[1]:
            raise ValueError(f"strength {self.strength} out of range for {rows.shape[1]} columns")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def r(self) -> int:
        return self.rows.shape[0]

    @property
    def N(self) -> int:
        return self.rows.shape[1]

    def __repr__(self) -> str:
        return f"OA({self.r},{self.N},{self.d},{self.strength})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OrthogonalArray)
            and self.d == other.d
            and self.strength == other.strength
            and np.array_equal(self.rows, other.rows)
        )

    def to_text(self) -> str:
        lines = [f"OA {self.r} {self.N} {self.d} {self.strength}"]
        lines += [" ".join(str(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> OrthogonalArray:
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "OA" or len(lines[0]) != 5:
            raise ValueError("expected header 'OA r N d k'")
        r, N, d, k = (int(x) for x in lines[0][1:])
        rows = np.array([[int(x) for x in ln] for ln in lines[1:]], dtype=np.int64).reshape(-1, N)
        if rows.shape[0] != r:
            raise ValueError(f"header declares {r} rows, found {rows.shape[0]}")
        return cls(rows, d, k)

    def to_json(self) -> dict:
        out = {
            "r": self.r,
            "N": self.N,
            "d": self.d,
            "k": self.strength,
            "rows": self.rows.tolist(),
        }
        if self.field is not None:
            out["field"] = self.field.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> OrthogonalArray:
        fld = Field.from_json(obj["field"]) if obj.get("field") else None
        rows = np.array(obj["rows"], dtype=np.int64).reshape(-1, obj["N"])
        return cls(rows, obj["d"], obj["k"], fld)


def full_factorial(d: int, N: int) -> OrthogonalArray:
    """All ``d**N`` tuples in lexicographic order (strength N)."""
    if d < 2 or N < 1:
        raise ValueError("need d >= 2 and N >= 1")
    _check_budget(d**N)
    rows = np.array(list(itertools.product(range(d), repeat=N)), dtype=np.int64)
    return OrthogonalArray(rows, d, N, name=f"full_factorial({d},{N})")


def zero_sum_oa(d: int, N: int, l: int = 0) -> OrthogonalArray:
    """Rows of ``range(d)**N`` whose digit sum is ``l`` mod d (strength N-1)."""
    if d < 2 or N < 2:
        raise ValueError("need d >= 2 and N >= 2")
    if not 0 <= l < d:
        raise ValueError(f"residue {l} out of range({d})")
    _check_budget(d ** (N - 1))
    head = np.array(list(itertools.product(range(d), repeat=N - 1)), dtype=np.int64)
    last = (l - head.sum(axis=1)) % d
    rows = np.column_stack([head, last])
    return OrthogonalArray(rows, d, N - 1, name=f"zero_sum_oa({d},{N},{l})")


def vandermonde_oa(f: Field, extended: bool = False) -> OrthogonalArray:
    """Rows ``(i, k, i + a j + a^2 k for every nonzero a)`` over GF(d), d > 3.

    Gives an OA(d^3, d+1, d, 3); with ``extended`` (d = 2^t, t >= 2) the
    column ``j`` is appended for an OA(d^3, d+2, d, 3).  Rows are ordered
    lexicographically in (i, j, k) and entries are element indices.
    """
    d = f.d
    if d <= 3:
        raise ValueError("vandermonde_oa needs d > 3")
    if extended and (f.p != 2 or f.t < 2):
        raise ValueError("the extra column only works for d = 2^t with t >= 2")
    _check_budget(d**3)
    add, mul = f.add_table, f.mul_table
    i, j, k = (g.ravel() for g in np.meshgrid(np.arange(d), np.arange(d), np.arange(d), indexing="ij"))
    cols = [i, k]
    for a in range(1, d):
        cols.append(add[add[i, mul[a, j]], mul[mul[a, a], k]])
    if extended:
        cols.append(j)
    return OrthogonalArray(np.column_stack(cols), d, 3, f, name=f"vandermonde_oa({f!r}, extended={extended})")


def strength_check(oa: OrthogonalArray, k: int) -> bool:
    """True iff every k-column projection contains each k-tuple exactly r/d^k times."""
    r, N, d = oa.r, oa.N, oa.d
    if not 0 <= k <= N:
        raise ValueError(f"strength {k} out of range for {N} columns")
    if r % d**k:
        return False
    lam = r // d**k
    weights = d ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for cols in itertools.combinations(range(N), k):
        codes = oa.rows[:, list(cols)] @ weights
        counts = np.bincount(codes, minlength=d**k)
        if not np.all(counts == lam):
            return False
    return True


def irredundancy_check(oa: OrthogonalArray, k: int) -> bool:
    """True iff every (N-k)-column projection has r pairwise distinct rows."""
    r, N = oa.r, oa.N
    if not 0 <= k < N:
        raise ValueError(f"need 0 <= k < N, got k={k}, N={N}")
    for cols in itertools.combinations(range(N), N - k):
        if len(np.unique(oa.rows[:, list(cols)], axis=0)) != r:
            return False
    return True


def oa_to_qoa(oa: OrthogonalArray, k: int | None = None):
    """Write each row of an irredundant OA as a computational basis ket."""
    from .qoa import QuantumOA
    from .qstate import basis_ket

    k = oa.strength if k is None else k
    if not strength_check(oa, k):
        raise ValueError(f"{oa!r} does not have strength {k}")
    if k < oa.N and not irredundancy_check(oa, k):
        raise ValueError(f"{oa!r} is not irredundant at strength {k}")
    rows = [basis_ket(oa.d, row.tolist()) for row in oa.rows]
    return QuantumOA(rows, oa.d, k, provenance={"construction": "oa_to_qoa", "source": oa.name or repr(oa)})


# The 6-factor, 2-level, strength-2 irredundant array used as the worked example.
IROA_8_6_2_2 = OrthogonalArray(
    np.array(
        [
            [0, 0, 0, 0, 0, 0],
            [0, 0, 1, 1, 1, 0],
            [0, 1, 1, 1, 0, 1],
            [0, 1, 0, 0, 1, 1],
            [1, 0, 1, 0, 1, 1],
            [1, 0, 0, 1, 0, 1],
            [1, 1, 0, 1, 1, 0],
            [1, 1, 1, 0, 0, 0],
        ]
    ),
    2,
    2,
    name="IrOA(8,6,2,2)",
)
