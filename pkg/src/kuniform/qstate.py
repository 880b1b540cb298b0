"""Sparse pure states on n qudit sites and the basis families used by the builders.

A :class:`SparseState` maps kets (tuples of digits, site 1 leftmost) to
complex amplitudes.  Partial traces never densify the full state: the
amplitudes are scattered into a ``d^|S| x (#complement kets)`` sparse
matrix ``M`` and the reduced operator is ``M @ M^H``.

Phases for the qudit families use the additive character
``chi(a) = exp(2*pi*i*Tr(a)/p)`` of GF(p^t).  For prime d this is exactly
``omega**(i*l)`` with ``omega = exp(2*pi*i/d)``; for extension fields it
is the choice that keeps ``sum_l chi((i - i') * l) = d * delta(i, i')``.
The naive ``omega**index(i*l)`` is available as ``phase="index"`` for
comparison only; it is not orthogonal over GF(4), GF(8) or GF(9).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .ffield import Field

DROP_TOL = 1e-14


class SparseState:
    """Immutable pure state of ``n`` sites with local dimension ``d``.

    Parameters
    ----------
    d, n : int
        Local dimension and number of sites.
    amps : mapping
        Ket tuple -> complex amplitude.  Entries with modulus below
        ``DROP_TOL`` are discarded.
    """

    def __init__(self, d: int, n: int, amps: Mapping[tuple[int, ...], complex]):
        if d < 2 or n < 1:
            raise ValueError(f"invalid shape d={d}, n={n}")
        clean = {}
        for ket, a in amps.items():
            ket = tuple(int(x) for x in ket)
            if len(ket) != n or any(not 0 <= x < d for x in ket):
                raise ValueError(f"ket {ket} invalid for d={d}, n={n}")
            a = complex(a)
            if abs(a) > DROP_TOL:
                clean[ket] = a
        self.d = d
        self.n = n
        self._amps = dict(sorted(clean.items()))

    @property
    def amps(self) -> dict[tuple[int, ...], complex]:
        return dict(self._amps)

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps.items())

    def __getitem__(self, ket) -> complex:
        return self._amps.get(tuple(ket), 0j)

    def __repr__(self) -> str:
        return f"SparseState(d={self.d}, n={self.n}, nnz={len(self)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseState)
            and (self.d, self.n) == (other.d, other.n)
            and self._amps == other._amps
        )

    __hash__ = None

    def close_to(self, other: SparseState, tol: float = 1e-12) -> bool:
        if (self.d, self.n) != (other.d, other.n):
            return False
        kets = set(self._amps) | set(other._amps)
        return all(abs(self[k] - other[k]) <= tol for k in kets)

    # -- array views --------------------------------------------------------
    @cached_property
    def kets(self) -> np.ndarray:
        arr = np.array(list(self._amps), dtype=np.int64).reshape(len(self), self.n)
        arr.setflags(write=False)
        return arr

    @cached_property
    def values(self) -> np.ndarray:
        arr = np.fromiter(self._amps.values(), dtype=complex, count=len(self))
        arr.setflags(write=False)
        return arr

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))

    def to_dense(self) -> np.ndarray:
        """Full state vector, site 1 most significant.  Only for d**n <= 2**24."""
        if self.d**self.n > 2**24:
            raise ValueError(f"dense vector of size {self.d}^{self.n} exceeds 2^24")
        vec = np.zeros(self.d**self.n, dtype=complex)
        if len(self):
            vec[linearize(self.kets, self.d)] = self.values
        return vec

    # -- algebra ------------------------------------------------------------
    def __add__(self, other: SparseState) -> SparseState:
        _same_shape(self, other)
        out = dict(self._amps)
        for ket, a in other:
            out[ket] = out.get(ket, 0j) + a
        return SparseState(self.d, self.n, out)

    def __sub__(self, other: SparseState) -> SparseState:
        return self + (-1) * other

    def __mul__(self, c: complex) -> SparseState:
        return SparseState(self.d, self.n, {k: c * a for k, a in self})

    __rmul__ = __mul__

    def __matmul__(self, other: SparseState) -> SparseState:
        return tensor(self, other)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "amps": [{"ket": list(k), "re": a.real, "im": a.imag} for k, a in self],
        }

    @classmethod
    def from_json(cls, obj: dict) -> SparseState:
        amps = {tuple(e["ket"]): complex(e["re"], e["im"]) for e in obj["amps"]}
        return cls(obj["d"], obj["n"], amps)


def _same_shape(a: SparseState, b: SparseState) -> None:
    if (a.d, a.n) != (b.d, b.n):
        raise ValueError(f"shape mismatch: (d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})")


def linearize(kets: np.ndarray, d: int) -> np.ndarray:
    """Row-major integer index of each ket (first column most significant)."""
    idx = np.zeros(kets.shape[0], dtype=np.int64)
    for col in range(kets.shape[1]):
        idx = idx * d + kets[:, col]
    return idx


def basis_ket(d: int, digits: Sequence[int]) -> SparseState:
    return SparseState(d, len(digits), {tuple(digits): 1.0})


def add(a: SparseState, b: SparseState) -> SparseState:
    return a + b


def scalar_mul(c: complex, a: SparseState) -> SparseState:
    return c * a


def tensor(*states: SparseState) -> SparseState:
    """Tensor product; the first argument occupies the leftmost sites."""
    if not states:
        raise ValueError("tensor of no states")
    d = states[0].d
    amps: dict[tuple[int, ...], complex] = {(): 1.0}
    n = 0
    for s in states:
        if s.d != d:
            raise ValueError(f"local dimension mismatch: {d} vs {s.d}")
        amps = {k1 + k2: a1 * a2 for k1, a1 in amps.items() for k2, a2 in s}
        n += s.n
    return SparseState(d, n, amps)


def tensor_power(s: SparseState, m: int) -> SparseState:
    if m < 1:
        raise ValueError("tensor power must be >= 1")
    return tensor(*([s] * m))


def inner(a: SparseState, b: SparseState) -> complex:
    """<a|b>, antilinear in the first argument."""
    _same_shape(a, b)
    if len(a) > len(b):
        return complex(sum(a[k].conjugate() * v for k, v in b))
    return complex(sum(v.conjugate() * b[k] for k, v in a))


def normalize(a: SparseState) -> SparseState:
    nrm = a.norm()
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return (1.0 / nrm) * a


# -- partial traces -------------------------------------------------------------


def _check_subset(S: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate a 1-based site subset, returning it sorted and 0-based."""
    S = sorted(set(int(s) for s in S))
    if not S:
        raise ValueError("site subset must be nonempty")
    if S[0] < 1 or S[-1] > n:
        raise ValueError(f"site subset {S} out of range 1..{n}")
    return tuple(s - 1 for s in S)


def _marginal_factors(states: Sequence[SparseState], keep: tuple[int, ...]) -> list[sp.csr_matrix]:
    """Sparse ``d^|keep| x C`` matrices whose products give the reduced operators.

    All returned matrices share one column space: the complement kets seen
    in any of the states.
    """
    d, n = states[0].d, states[0].n
    rest = [j for j in range(n) if j not in keep]
    dim = d ** len(keep)
    comp_keys = [linearize(s.kets[:, rest], d) if rest else np.zeros(len(s), dtype=np.int64) for s in states]
    uniq, inverse = np.unique(np.concatenate(comp_keys), return_inverse=True)
    out, start = [], 0
    for s, key in zip(states, comp_keys):
        cols = inverse[start : start + len(key)]
        start += len(key)
        rows = linearize(s.kets[:, list(keep)], d)
        out.append(sp.csr_matrix((s.values, (rows, cols)), shape=(dim, len(uniq))))
    return out


def reduced_operator_sparse(a: SparseState, b: SparseState | None, S: Iterable[int]) -> sp.csr_matrix:
    """Sparse ``Tr_{S^c} |a><b|`` (``b`` defaults to ``a``).  S is 1-based."""
    if b is None:
        b = a
    _same_shape(a, b)
    keep = _check_subset(S, a.n)
    if b is a:
        (m,) = _marginal_factors([a], keep)
        return (m @ m.conj().T).tocsr()
    ma, mb = _marginal_factors([a, b], keep)
    return (ma @ mb.conj().T).tocsr()


def reduced_density(state: SparseState, S: Iterable[int]) -> np.ndarray:
    """Dense ``rho_S = Tr_{S^c} |state><state|`` over the 1-based sites S (sorted order)."""
    return reduced_operator_sparse(state, None, S).toarray()


def cross_reduced(row_a: SparseState, row_b: SparseState, S: Iterable[int]) -> np.ndarray:
    """Dense ``Tr_{S^c} |row_a><row_b|``; generally not Hermitian."""
    return reduced_operator_sparse(row_a, row_b, S).toarray()


# -- state families -------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def ghz_state(i: int, j: int, k: int) -> SparseState:
    """Signed GHZ basis state ``(-1)^a (|~i ~j ~k> + (-1)^w |ijk>) / sqrt(2)``.

    ``a`` is 1 iff i == j == k and ``w`` is the number of ones in (i, j, k).
    """
    for b in (i, j, k):
        if b not in (0, 1):
            raise ValueError("GHZ labels must be bits")
    sign = -1.0 if i == j == k else 1.0
    w = i + j + k
    amps = {
        (1 - i, 1 - j, 1 - k): sign / _SQRT2,
        (i, j, k): sign * (-1) ** w / _SQRT2,
    }
    return SparseState(2, 3, amps)


def bell_state(x: int, y: int) -> SparseState:
    """``((-1)^x |xy> + |~x ~y>) / sqrt(2)``."""
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError("Bell labels must be bits")
    return SparseState(2, 2, {(x, y): (-1) ** x / _SQRT2, (1 - x, 1 - y): 1 / _SQRT2})


def character_table(f: Field, phase: str = "trace") -> np.ndarray:
    """``table[i, l]`` is the phase attached to the pair (i, l) of field indices."""
    prod = f.mul_table
    if phase == "trace":
        return np.exp(2j * np.pi * f.trace_table[prod] / f.p)
    if phase == "index":
        return np.exp(2j * np.pi * prod / f.d)
    raise ValueError(f"unknown phase convention {phase!r}")


def _field_index(f: Field, x) -> int:
    i = int(x)
    if not 0 <= i < f.d:
        raise ValueError(f"element index {i} out of range for {f!r}")
    return i


def psi_state(f: Field, i, j, k, alpha, beta, phase: str = "trace") -> SparseState:
    """``(1/sqrt(d)) sum_l chi(i l) |l + j, l + alpha j + beta k, l>`` over GF(d).

    Arguments are field elements or their indices.  Requires d >= 3,
    alpha not in {0, 1} and beta != 0.
    """
    if f.d < 3:
        raise ValueError("psi_state needs d >= 3")
    i, j, k, alpha, beta = (_field_index(f, x) for x in (i, j, k, alpha, beta))
    if alpha in (0, 1):
        raise ValueError("alpha must be a nonzero field element other than 1")
    if beta == 0:
        raise ValueError("beta must be nonzero")
    add, mul = f.add_table, f.mul_table
    chi = character_table(f, phase)
    shift = int(add[mul[alpha, j], mul[beta, k]])
    norm = 1 / math.sqrt(f.d)
    amps = {(int(add[l, j]), int(add[l, shift]), l): norm * chi[i, l] for l in range(f.d)}
    return SparseState(f.d, 3, amps)


def phi3_state(d: int, i: int, j: int, k: int) -> SparseState:
    """``(1/sqrt(d)) sum_l w^(il) |l + 2j + k, l + j + 2k, l>`` with mod-d kets, d in {3, 5}."""
    if d not in (3, 5):
        raise ValueError("phi3_state is defined for d in {3, 5}")
    for x in (i, j, k):
        if not 0 <= x < d:
            raise ValueError(f"label {x} out of range for d={d}")
    norm = 1 / math.sqrt(d)
    amps = {
        ((l + 2 * j + k) % d, (l + j + 2 * k) % d, l): norm * np.exp(2j * np.pi * (i * l % d) / d)
        for l in range(d)
    }
    return SparseState(d, 3, amps)


def phi2_state(f: Field, i, j, phase: str = "trace") -> SparseState:
    """``(1/sqrt(d)) sum_l chi(i l) |l + j, l>`` over GF(d), d >= 3."""
    if f.d < 3:
        raise ValueError("phi2_state needs d >= 3")
    i, j = _field_index(f, i), _field_index(f, j)
    chi = character_table(f, phase)
    norm = 1 / math.sqrt(f.d)
    return SparseState(f.d, 2, {(int(f.add_table[l, j]), l): norm * chi[i, l] for l in range(f.d)})


def gram(states: Sequence[SparseState]) -> np.ndarray:
    """Gram matrix ``G[a, b] = <states[a]|states[b]>``."""
    if not states:
        return np.zeros((0, 0), dtype=complex)
    for s in states[1:]:
        _same_shape(states[0], s)
    all_kets = np.concatenate([s.kets for s in states])
    _, cols = np.unique(all_kets, axis=0, return_inverse=True)
    rows = np.repeat(np.arange(len(states)), [len(s) for s in states])
    vals = np.concatenate([s.values for s in states])
    mat = sp.csr_matrix((vals, (rows, cols.ravel())), shape=(len(states), int(cols.max()) + 1))
    return (mat.conj() @ mat.T).toarray()
