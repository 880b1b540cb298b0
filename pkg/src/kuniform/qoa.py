"""Quantum orthogonal array builders.

Every builder returns a :class:`QuantumOA` whose rows are classical basis
columns tensored with copies of a small entangled basis (GHZ, Bell or the
qudit families in :mod:`kuniform.qstate`).  Rows come out in lexicographic
order of their generating labels.

Coverage, as implemented by :func:`dispatch`:

* strength 2, any prime power d and N >= 5;
* strength 3, qubits, N >= 6 except N in {7, 8, 9, 11};
* strength 3, d = 5, N >= 10 with N = 1 mod 3 (the literal d = 3 and
  N = 7 cases fail verification and are refused);
* strength 3, prime power d >= 7 and N >= 7.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Any

from .ffield import Field, prime_power
from .oarray import _check_budget
from .qstate import (
    SparseState,
    basis_ket,
    bell_state,
    ghz_state,
    phi2_state,
    phi3_state,
    psi_state,
    tensor,
)


class NotCoveredError(ValueError):
    """Requested (N, d, k) lies outside the implemented constructions."""


@dataclass(eq=False)
class QuantumOA:
    """r rows of N-site pure states with local dimension d and strength k."""

    rows: list[SparseState]
    d: int
    k: int
    provenance: dict[str, Any] = dc_field(default_factory=dict)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("a QOA needs at least one row")
        n = self.rows[0].n
        for row in self.rows:
            if (row.d, row.n) != (self.d, n):
                raise ValueError(f"row shape (d={row.d}, n={row.n}) != (d={self.d}, n={n})")
        self.rows = list(self.rows)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def N(self) -> int:
        return self.rows[0].n

    @property
    def params(self) -> tuple[int, int, int, int]:
        return (self.r, self.N, self.d, self.k)

    def __repr__(self) -> str:
        return "QOA({},{},{},{})".format(*self.params)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "N": self.N,
            "d": self.d,
            "k": self.k,
            "provenance": self.provenance,
            "rows": [row.to_json() for row in self.rows],
        }

    @classmethod
    def from_json(cls, obj: dict) -> QuantumOA:
        rows = [SparseState.from_json(r) for r in obj["rows"]]
        q = cls(rows, obj["d"], obj["k"], obj.get("provenance", {}))
        if (q.r, q.N) != (obj["r"], obj["N"]):
            raise ValueError(f"declared r={obj['r']}, N={obj['N']} but rows give {q.r}, {q.N}")
        return q


def assemble_state(q: QuantumOA) -> SparseState:
    """The k-uniform state ``(1/sqrt(r)) sum_i |row_i>``."""
    amps: dict[tuple[int, ...], complex] = {}
    for row in q.rows:
        for ket, a in row:
            amps[ket] = amps.get(ket, 0j) + a
    scale = 1 / math.sqrt(q.r)
    return SparseState(q.d, q.N, {ket: scale * a for ket, a in amps.items()})


def _rows(d: int, prefixes, factors) -> list[SparseState]:
    return [tensor(basis_ket(d, prefix), *fac) for prefix, fac in zip(prefixes, factors)]


# -- qubits, strength 3 ---------------------------------------------------------


def build_qubit_3_3m(m: int) -> QuantumOA:
    """QOA(8, 3+3m, 2, 3) with rows ``|ijk> |GHZ_ijk>^m``; m >= 1, m != 2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 2:
        raise ValueError(
            "m = 2 is excluded: the rows |ijk>|GHZ_ijk>^2 fail on sites {1, 4, 7} "
            "(see verify.m2_counterexample)"
        )
    labels = list(itertools.product((0, 1), repeat=3))
    rows = _rows(2, labels, ([ghz_state(*lab)] * m for lab in labels))
    return QuantumOA(rows, 2, 3, {"construction": "qubit_3_3m", "m": m})


def build_qubit_4_3m(m: int) -> QuantumOA:
    """QOA(8, 4+3m, 2, 3) with rows ``|i, j, k, i+j+k> |GHZ_ijk>^m``; m >= 2."""
    if m < 2:
        raise ValueError("m must be >= 2: at m = 1 the state would be an AME(7,2), which does not exist")
    labels = list(itertools.product((0, 1), repeat=3))
    prefixes = [(i, j, k, (i + j + k) % 2) for i, j, k in labels]
    rows = _rows(2, prefixes, ([ghz_state(*lab)] * m for lab in labels))
    return QuantumOA(rows, 2, 3, {"construction": "qubit_4_3m", "m": m})


def build_qubit_11_3m(m: int) -> QuantumOA:
    """QOA(32, 11+3m, 2, 3).

    Row (i, j, k, f, g) is
    ``|ijkfg> |phi_{f+i, g+j}> |phi_{g+k, f+i}> |phi_{g+j, i+k}> |GHZ_{jfg}>^m``
    with Bell states ``phi_xy`` and all label sums mod 2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    labels = list(itertools.product((0, 1), repeat=5))
    factors = []
    for i, j, k, f, g in labels:
        bells = [
            bell_state((f + i) % 2, (g + j) % 2),
            bell_state((g + k) % 2, (f + i) % 2),
            bell_state((g + j) % 2, (i + k) % 2),
        ]
        factors.append(bells + [ghz_state(j, f, g)] * m)
    rows = _rows(2, labels, factors)
    return QuantumOA(rows, 2, 3, {"construction": "qubit_11_3m", "m": m})


# -- prime-power qudits, strength 3 ---------------------------------------------


@dataclass(frozen=True)
class QudParams:
    """Field parameters for the qudit strength-3 constructions.

    ``alphas`` and ``beta`` are element indices; ``alphas[0]`` must be 1.
    """

    field: Field
    alphas: tuple[int, ...]
    beta: int

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        object.__setattr__(self, "beta", int(self.beta))

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def alpha2(self) -> int:
        return self.alphas[1]

    def _basics(self) -> list[str]:
        f, out = self.field, []
        if len(self.alphas) < 2:
            out.append("need at least two alphas")
            return out
        if any(not 0 <= a < f.d for a in self.alphas + (self.beta,)):
            out.append("element index out of range")
            return out
        if self.alphas[0] != 1:
            out.append("alpha_1 must be 1")
        if 0 in self.alphas:
            out.append("alphas must be nonzero")
        if len(set(self.alphas)) != len(self.alphas):
            out.append("alphas must be distinct")
        if self.beta == 0:
            out.append("beta must be nonzero")
        a2 = self.alpha2
        if f.mul_table[a2, a2] == 1:
            out.append("alpha_2^2 must differ from 1")
        return out

    def forbidden_betas(self) -> dict[str, int]:
        """The general exclusion list, keyed by a readable label."""
        f = self.field
        mul, sub = f.mul_table, f.sub_idx
        a2 = self.alpha2
        sq = int(mul[a2, a2])
        out = {
            "alpha_2^2 - 1": sub(sq, 1),
            "alpha_2^2 + alpha_2": int(f.add_table[sq, a2]),
        }
        for s, a in enumerate(self.alphas, start=1):
            out[f"alpha_2*alpha_{s}"] = int(mul[a2, a])
            out[f"(alpha_2 - 1)*alpha_{s}"] = int(mul[sub(a2, 1), a])
        return out

    def forbidden_betas_short(self) -> dict[str, int]:
        """Exclusion list of the four-prefix-column construction (n = 2)."""
        f = self.field
        a2 = self.alpha2
        sq = int(f.mul_table[a2, a2])
        return {
            "alpha_2": a2,
            "alpha_2^2": sq,
            "alpha_2 - 1": f.sub_idx(a2, 1),
            "alpha_2^2 - 1": f.sub_idx(sq, 1),
            "alpha_2^2 + alpha_2": int(f.add_table[sq, a2]),
            "alpha_2^2 - alpha_2": f.sub_idx(sq, a2),
        }

    def violations(self, short: bool = False) -> list[str]:
        out = self._basics()
        if out:
            return out
        table = self.forbidden_betas_short() if short else self.forbidden_betas()
        return [f"beta = {name}" for name, val in table.items() if val == self.beta]

    def is_valid(self, short: bool = False) -> bool:
        return not self.violations(short)

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "alphas": list(self.alphas), "beta": self.beta}


# Pinned parameters as element indices of the default presentations.
PINNED_PARAMS: dict[int, tuple[tuple[int, ...], int]] = {
    7: ((1, 2, 3, 4), 5),
    11: ((1, 2, 3, 4), 5),
    13: ((1, 2, 3, 4), 5),
    # GF(8) = Z_2[x]/(x^3+x^2+1): alphas 1, x, x^2, x+1 and beta x^2+x+1
    8: ((1, 2, 4, 3), 7),
    # GF(9) = Z_3[x]/(x^2+1): alphas 1, x+1, x, 2x and beta x+2.  This tuple
    # hits beta = (alpha_2 - 1) * alpha_2, so select_params skips it; the
    # arrays it generates still verify (see tests).
    9: ((1, 4, 3, 6), 5),
}


def pinned_params(f: Field, n: int) -> QudParams:
    """The pinned tuple for GF(d), truncated to n alphas (not validated)."""
    if f.d not in PINNED_PARAMS or f != Field(f.p, f.t):
        raise KeyError(f"no pinned parameters for {f!r}")
    alphas, beta = PINNED_PARAMS[f.d]
    return QudParams(f, alphas[:n], beta)


def _qud_rows(params: QudParams, prefix_alphas: tuple[int, ...], m: int) -> list[SparseState]:
    f = params.field
    d = f.d
    _check_budget(d**3)
    add, mul = f.add_table, f.mul_table
    rows = []
    for i, j, k in itertools.product(range(d), repeat=3):
        prefix = [i, k]
        for a in prefix_alphas:
            prefix.append(int(add[add[i, mul[a, j]], mul[mul[a, a], k]]))
        psi = psi_state(f, i, j, k, params.alpha2, params.beta)
        rows.append(tensor(basis_ket(d, prefix), *([psi] * m)))
    return rows


def build_qud_4_3m(params: QudParams, m: int) -> QuantumOA:
    """QOA(d^3, 4+3m, d, 3) with rows ``|i, k, i+j+k, i+a j+a^2 k> |psi_ijk>^m``, a = alpha_2."""
    f = params.field
    if f.d <= 3:
        raise ValueError("needs a field with d > 3")
    if m < 1:
        raise ValueError("m must be >= 1")
    if params.n != 2:
        raise ValueError("this construction takes exactly two alphas (1, alpha_2)")
    bad = params.violations(short=True)
    if bad:
        raise ValueError("inadmissible parameters: " + ", ".join(bad))
    rows = _qud_rows(params, params.alphas, m)
    return QuantumOA(rows, f.d, 3, {"construction": "qud_4_3m", "m": m, "params": params.to_json()})


def build_qud_2_n_3m(params: QudParams, m: int, check_params: bool = True) -> QuantumOA:
    """QOA(d^3, 2+n+3m, d, 3) with prefix ``(i, k, i + a_s j + a_s^2 k for s = 1..n)``.

    The beta exclusions are sufficient, not necessary.  ``check_params=False``
    builds from any structurally valid tuple (nonzero distinct alphas with
    alpha_1 = 1, alpha_2^2 != 1, nonzero beta), leaving the verdict to
    :mod:`kuniform.verify`.
    """
    f = params.field
    if f.d <= 3:
        raise ValueError("needs a field with d > 3")
    if m < 1:
        raise ValueError("m must be >= 1")
    bad = params.violations() if check_params else params._basics()
    if bad:
        raise ValueError("inadmissible parameters: " + ", ".join(bad))
    rows = _qud_rows(params, params.alphas, m)
    prov = {"construction": "qud_2_n_3m", "n": params.n, "m": m, "params": params.to_json()}
    if not check_params:
        prov["params_checked"] = False
    return QuantumOA(rows, f.d, 3, prov)


def search_params(f: Field, n: int) -> QudParams | None:
    """First admissible (alpha_2, remaining alphas, beta), each scanned by ascending index."""
    d = f.d
    for a2 in range(2, d):
        if f.mul_table[a2, a2] == 1:
            continue
        others = [a for a in range(2, d) if a != a2]
        for rest in itertools.combinations(others, n - 2):
            for beta in range(1, d):
                cand = QudParams(f, (1, a2) + rest, beta)
                if cand.is_valid():
                    return cand
    return None


def select_params(f: Field, n: int) -> QudParams:
    """Parameters for :func:`build_qud_2_n_3m` with n prefix alphas.

    Pinned values are used where known; other fields take the first tuple
    from :func:`search_params`.
    """
    if f.d < 7:
        raise ValueError("parameter selection is for prime powers d >= 7")
    if not 2 <= n <= 4:
        raise ValueError("n must be 2, 3 or 4")
    try:
        params = pinned_params(f, n)
    except KeyError:
        params = None
    if params is not None and params.is_valid():
        return params
    found = search_params(f, n)
    if found is None:
        raise RuntimeError(f"no admissible parameters in {f!r} for n={n}; this should not happen for d >= 7")
    return found


def build_qud35(d: int, m: int) -> QuantumOA:
    """Rows ``|i, j, k, (d-1)(i+j+k)> |phi_ijk>^m`` for d in {3, 5}, claimed QOA(d^3, 4+3m, d, 3).

    Built literally.  Verification shows it is a QOA only for
    d = 5 with m >= 2: at m = 1 the marginal on sites {1, 4, 7} keeps
    off-diagonal blocks, and for d = 3 the phi family is not a basis.
    """
    if d not in (3, 5):
        raise ValueError("d must be 3 or 5")
    if m < 1:
        raise ValueError("m must be >= 1")
    labels = list(itertools.product(range(d), repeat=3))
    prefixes = [(i, j, k, (d - 1) * (i + j + k) % d) for i, j, k in labels]
    rows = _rows(d, prefixes, ([phi3_state(d, *lab)] * m for lab in labels))
    return QuantumOA(rows, d, 3, {"construction": "qud35", "m": m})


# -- strength 2 -----------------------------------------------------------------

def _named_bell(i: int, j: int) -> SparseState:
    """Phi+, Psi+, Psi-, Phi- for (i, j) = 00, 01, 10, 11."""
    s = 1 / math.sqrt(2)
    if (i, j) == (0, 0):
        amps = {(0, 0): s, (1, 1): s}
    elif (i, j) == (0, 1):
        amps = {(0, 1): s, (1, 0): s}
    elif (i, j) == (1, 0):
        amps = {(0, 1): s, (1, 0): -s}
    else:
        amps = {(0, 0): s, (1, 1): -s}
    return SparseState(2, 2, amps)


def build_strength2_qubit(variant: str, m: int) -> QuantumOA:
    """QOA(4, 2+2m, 2, 2) (m >= 2) or QOA(4, 3+2m, 2, 2) (m >= 1) from Bell arrangements."""
    if variant == "2+2m":
        if m < 2:
            raise ValueError("variant 2+2m needs m >= 2")
        prefix = lambda i, j: (i, j)  # noqa: E731
    elif variant == "3+2m":
        if m < 1:
            raise ValueError("variant 3+2m needs m >= 1")
        prefix = lambda i, j: (i, j, (i + j) % 2)  # noqa: E731
    else:
        raise ValueError(f"unknown variant {variant!r}; use '2+2m' or '3+2m'")
    labels = list(itertools.product((0, 1), repeat=2))
    rows = _rows(2, [prefix(*lab) for lab in labels], ([_named_bell(*lab)] * m for lab in labels))
    return QuantumOA(rows, 2, 2, {"construction": "strength2_qubit", "variant": variant, "m": m})


def build_strength2_qud(f: Field, variant: str, m: int, alpha=None) -> QuantumOA:
    """QOA(d^2, 3+2m, d, 2) or QOA(d^2, 4+2m, d, 2) over GF(d), d >= 3.

    Rows are ``|i, j, i+j> |phi_ij>^m`` or ``|i, j, i+j, i+alpha j> |phi_ij>^m``.
    ``alpha`` defaults to the element with index 2.
    """
    if f.d < 3:
        raise ValueError("needs d >= 3")
    if m < 1:
        raise ValueError("m must be >= 1")
    add, mul = f.add_table, f.mul_table
    if variant == "3+2m":
        alpha = None
    elif variant == "4+2m":
        alpha = 2 if alpha is None else int(alpha)
        if not 0 <= alpha < f.d or alpha in (0, 1):
            raise ValueError("alpha must be a nonzero field element other than 1")
    else:
        raise ValueError(f"unknown variant {variant!r}; use '3+2m' or '4+2m'")
    labels = list(itertools.product(range(f.d), repeat=2))
    prefixes = []
    for i, j in labels:
        pre = [i, j, int(add[i, j])]
        if alpha is not None:
            pre.append(int(add[i, mul[alpha, j]]))
        prefixes.append(pre)
    rows = _rows(f.d, prefixes, ([phi2_state(f, i, j)] * m for i, j in labels))
    prov = {"construction": "strength2_qud", "variant": variant, "m": m, "field": f.to_json()}
    if alpha is not None:
        prov["alpha"] = alpha
    return QuantumOA(rows, f.d, 2, prov)


# -- dispatcher -----------------------------------------------------------------


@dataclass(frozen=True)
class Plan:
    """Which builder :func:`dispatch` will call, and with what arguments."""

    builder: str
    kwargs: dict
    r: int

    def run(self) -> QuantumOA:
        return BUILDERS[self.builder](**self.kwargs)


def plan(N: int, d: int, k: int) -> Plan:
    """Choose a construction for QOA(r, N, d, k), or raise :class:`NotCoveredError`."""
    if k not in (2, 3):
        raise NotCoveredError(f"strength {k} is not covered (only 2 and 3)")
    pt = prime_power(d)
    if pt is None:
        raise NotCoveredError(f"d={d} is not a prime power; not covered by the implemented constructions")
    where = f"(N={N}, d={d}, k={k}) is not covered by the implemented constructions"
    if k == 2:
        if N < 5:
            raise NotCoveredError(where)
        if d == 2:
            if N % 2:
                return Plan("strength2_qubit", {"variant": "3+2m", "m": (N - 3) // 2}, 4)
            return Plan("strength2_qubit", {"variant": "2+2m", "m": (N - 2) // 2}, 4)
        f = Field(*pt)
        if N % 2:
            return Plan("strength2_qud", {"f": f, "variant": "3+2m", "m": (N - 3) // 2}, d * d)
        return Plan("strength2_qud", {"f": f, "variant": "4+2m", "m": (N - 4) // 2}, d * d)
    if d == 2:
        if N < 6 or N in (7, 8, 9, 11):
            raise NotCoveredError(where)
        if N % 3 == 0:
            return Plan("qubit_3_3m", {"m": (N - 3) // 3}, 8)
        if N % 3 == 1:
            return Plan("qubit_4_3m", {"m": (N - 4) // 3}, 8)
        return Plan("qubit_11_3m", {"m": (N - 11) // 3}, 32)
    if d in (3, 5):
        if N < 7 or N % 3 != 1:
            raise NotCoveredError(where)
        m = (N - 4) // 3
        # The literal d = 3, 5 family fails on sites {1, 4, 7} when m = 1,
        # and for d = 3 the phi basis is degenerate (2j + k = -(j + 2k) mod 3).
        if d == 3 or m == 1:
            raise NotCoveredError(
                f"(N={N}, d={d}, k=3): the literal construction for this case fails verification"
            )
        return Plan("qud35", {"d": d, "m": m}, d**3)
    if d < 7 or N < 7:
        raise NotCoveredError(where)
    n = 2 + (N - 7) % 3
    m = (N - 2 - n) // 3
    f = Field(*pt)
    return Plan("qud_2_n_3m", {"params": select_params(f, n), "m": m}, d**3)


def dispatch(N: int, d: int, k: int) -> QuantumOA:
    """Build a QOA with exactly the requested (N, d, k)."""
    q = plan(N, d, k).run()
    if (q.N, q.d, q.k) != (N, d, k):
        raise AssertionError(f"dispatcher produced {q!r} for request (N={N}, d={d}, k={k})")
    return q


BUILDERS = {
    "qubit_3_3m": build_qubit_3_3m,
    "qubit_4_3m": build_qubit_4_3m,
    "qubit_11_3m": build_qubit_11_3m,
    "qud_4_3m": build_qud_4_3m,
    "qud_2_n_3m": build_qud_2_n_3m,
    "qud35": build_qud35,
    "strength2_qubit": build_strength2_qubit,
    "strength2_qud": build_strength2_qud,
}
