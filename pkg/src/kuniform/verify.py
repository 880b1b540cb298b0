"""Brute-force certification of k-uniform states and quantum orthogonal arrays.

Two independent checks are provided:

* :func:`is_k_uniform` traces the assembled state down to every k-site
  subset and compares the trace-normalized marginal with ``I / d^k``.
* :func:`qoa_check` evaluates the defining sum over row pairs,
  ``sum_{i,j} Tr_{S^c} |row_i><row_j|``, against ``(r / d^k) I`` with no
  normalization.

Both report the largest absolute entry deviation over all subsets.
"""

from __future__ import annotations

import itertools
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .ffield import Field
from .qoa import QuantumOA, assemble_state
from .qstate import (
    SparseState,
    _check_subset,
    basis_ket,
    bell_state,
    cross_reduced,
    ghz_state,
    inner,
    linearize,
    psi_state,
    reduced_operator_sparse,
    tensor,
)

DEFAULT_TOL = 1e-9
NORM_TOL = 1e-10


@dataclass
class UniformityReport:
    k: int
    subsets_checked: int
    max_deviation: float
    worst_subset: list[int]
    passed: bool
    wall_time: float
    tolerance: float = DEFAULT_TOL
    method: str = "state"
    # qoa_check only: deviation of the raw pair sum, before dividing by r
    raw_max_deviation: float | None = None

    def to_json(self) -> dict:
        return asdict(self)


def _deviation(op: sp.spmatrix, target: float) -> float:
    """max |op - target * I| over all entries of a square sparse operator."""
    op = op.tocoo()
    op.sum_duplicates()
    diag = op.diagonal()
    dev = float(np.max(np.abs(diag - target))) if diag.size else 0.0
    off = op.row != op.col
    if off.any():
        dev = max(dev, float(np.max(np.abs(op.data[off]))))
    return dev


def _run_subsets(fn: Callable[[tuple[int, ...]], float], n: int, k: int, workers: int):
    subsets = list(itertools.combinations(range(1, n + 1), k))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            devs = list(pool.map(fn, subsets))
    else:
        devs = [fn(S) for S in subsets]
    # ties resolve to the lexicographically first subset
    worst = int(np.argmax(devs)) if devs else 0
    return subsets, devs, worst


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n // 2:
        raise ValueError(f"k={k} out of range: an {n}-site state can be at most {n // 2}-uniform")


def is_k_uniform(
    state: SparseState, k: int, tol: float = DEFAULT_TOL, workers: int = 1
) -> UniformityReport:
    """Check that every k-site marginal of ``state`` is maximally mixed.

    Only subsets of size exactly k are examined; a k-uniform state is
    automatically (k-1)-uniform.
    """
    _check_k(state.n, k)
    nrm = state.norm()
    if abs(nrm - 1) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm = {nrm!r})")
    start = time.perf_counter()
    target = 1.0 / state.d**k

    def one(S):
        rho = reduced_operator_sparse(state, None, S)
        return _deviation(rho / rho.diagonal().sum().real, target)

    subsets, devs, worst = _run_subsets(one, state.n, k, workers)
    max_dev = float(devs[worst])
    return UniformityReport(
        k=k,
        subsets_checked=len(subsets),
        max_deviation=max_dev,
        worst_subset=list(subsets[worst]),
        passed=max_dev <= tol,
        wall_time=time.perf_counter() - start,
        tolerance=tol,
    )


def _pair_sum_operator(rows: Sequence[SparseState], S) -> sp.csr_matrix:
    """``sum_{i,j} Tr_{S^c} |row_i><row_j|`` as a sparse matrix.

    Each row is scattered separately into a shared (kept ket) x (complement
    ket) layout; the double sum over row pairs factorizes as ``G @ G^H`` with
    ``G`` the sum of the per-row blocks.
    """
    d, n = rows[0].d, rows[0].n
    keep = _check_subset(S, n)
    rest = [j for j in range(n) if j not in keep]
    kets = np.concatenate([r.kets for r in rows])
    vals = np.concatenate([r.values for r in rows])
    kept = linearize(kets[:, list(keep)], d)
    if rest:
        _, comp = np.unique(linearize(kets[:, rest], d), return_inverse=True)
    else:
        comp = np.zeros(len(kets), dtype=np.int64)
    g = sp.csr_matrix((vals, (kept, comp.ravel())), shape=(d ** len(keep), int(comp.max()) + 1))
    return (g @ g.conj().T).tocsr()


def qoa_check(q: QuantumOA, tol: float = DEFAULT_TOL, k: int | None = None, workers: int = 1) -> UniformityReport:
    """Check the defining QOA identity at strength k (default ``q.k``) on every subset."""
    k = q.k if k is None else k
    _check_k(q.N, k)
    for idx, row in enumerate(q.rows):
        nrm = row.norm()
        if abs(nrm - 1) > NORM_TOL:
            raise ValueError(f"row {idx} is not normalized (norm = {nrm!r})")
    start = time.perf_counter()
    target = q.r / q.d**k

    def one(S):
        return _deviation(_pair_sum_operator(q.rows, S), target)

    subsets, devs, worst = _run_subsets(one, q.N, k, workers)
    raw = float(devs[worst])
    return UniformityReport(
        k=k,
        subsets_checked=len(subsets),
        max_deviation=raw / q.r,
        worst_subset=list(subsets[worst]),
        passed=raw / q.r <= tol,
        wall_time=time.perf_counter() - start,
        tolerance=tol,
        method="qoa",
        raw_max_deviation=raw,
    )


def certify(q: QuantumOA, tol: float = DEFAULT_TOL, workers: int = 1) -> tuple[UniformityReport, UniformityReport]:
    """Run both checks on ``q``; returns ``(qoa_report, state_report)``."""
    return qoa_check(q, tol, workers=workers), is_k_uniform(assemble_state(q), q.k, tol, workers=workers)


# -- negative control -----------------------------------------------------------


def ghz_rows(m: int) -> list[SparseState]:
    """Rows ``|ijk> |GHZ_ijk>^m`` for every m, without the builder's m != 2 guard."""
    labels = list(itertools.product((0, 1), repeat=3))
    return [tensor(basis_ket(2, lab), *([ghz_state(*lab)] * m)) for lab in labels]


def m2_counterexample() -> tuple[tuple[int, ...], np.ndarray, float]:
    """Reduced state on sites {1, 4, 7} of the m = 2 GHZ arrangement.

    Returns the subset, the trace-normalized marginal and its max-abs
    deviation from ``I / 8``.
    """
    subset = (1, 4, 7)
    q = QuantumOA(ghz_rows(2), 2, 3, {"construction": "qubit_3_3m (unguarded)", "m": 2})
    rho = reduced_operator_sparse(assemble_state(q), None, subset).toarray()
    rho = rho / np.trace(rho).real
    dev = float(np.max(np.abs(rho - np.eye(8) / 8)))
    return subset, rho, dev


# -- trace identities for the GHZ, Bell and psi families ------------------------


@dataclass
class IdentityResult:
    name: str
    cases: int
    max_deviation: float
    passed: bool


def _family_identity(
    name: str,
    make: Callable[[tuple[int, ...]], SparseState],
    nvars: int,
    levels: int,
    summed: Sequence[int],
    primed: Sequence[int],
    keep: Sequence[int],
    scale: float,
    tol: float,
) -> IdentityResult:
    """Check ``sum_{summed} Tr_{~keep} |make(a)><make(a')| = scale * I * prod delta``.

    ``a'`` equals ``a`` except at the ``primed`` positions, which range
    independently.  With ``keep`` empty the trace is the inner product
    ``<make(a')|make(a)>``.
    """
    free = [v for v in range(nvars) if v not in summed]
    cache: dict[tuple[int, ...], SparseState] = {}

    def state(lab):
        if lab not in cache:
            cache[lab] = make(lab)
        return cache[lab]

    dim = levels ** len(keep)
    worst, cases = 0.0, 0
    for free_vals in itertools.product(range(levels), repeat=len(free)):
        for primed_vals in itertools.product(range(levels), repeat=len(primed)):
            total = np.zeros((dim, dim), dtype=complex)
            for sum_vals in itertools.product(range(levels), repeat=len(summed)):
                a = [0] * nvars
                for v, x in zip(free, free_vals):
                    a[v] = x
                for v, x in zip(summed, sum_vals):
                    a[v] = x
                b = list(a)
                for v, x in zip(primed, primed_vals):
                    b[v] = x
                ket, bra = state(tuple(a)), state(tuple(b))
                if keep:
                    total += cross_reduced(ket, bra, keep)
                else:
                    total += inner(bra, ket)
            delta = all(a_v == p for a_v, p in zip((free_vals[free.index(v)] for v in primed), primed_vals))
            expected = scale * np.eye(dim) * (1.0 if delta else 0.0)
            worst = max(worst, float(np.max(np.abs(total - expected))))
            cases += 1
    return IdentityResult(name, cases, worst, worst <= tol)


def _complement(traced: Sequence[int], n: int) -> tuple[int, ...]:
    return tuple(s for s in range(1, n + 1) if s not in traced)


# (summed labels, primed labels, traced sites, scale); labels 0, 1, 2 = i, j, k
_GHZ_IDENTITIES = [
    # one summed label, two traced sites, one primed label -> I_2
    ("j", "i", (2, 3), 1.0),
    ("k", "i", (2, 3), 1.0),
    ("i", "j", (1, 3), 1.0),
    ("k", "j", (1, 3), 1.0),
    ("i", "k", (1, 2), 1.0),
    ("j", "k", (1, 2), 1.0),
    # one summed label, two traced sites, two primed labels -> I_2
    ("i", "jk", (2, 3), 1.0),
    ("j", "ik", (1, 3), 1.0),
    ("k", "ij", (1, 2), 1.0),
    # one summed label, one traced site -> I_4 / 2
    ("j", "", (1,), 0.5),
    ("k", "", (1,), 0.5),
    ("i", "", (2,), 0.5),
    ("k", "", (2,), 0.5),
    ("i", "", (3,), 0.5),
    ("j", "", (3,), 0.5),
    # two summed labels, one traced site, one primed label -> I_4
    ("ij", "k", (1,), 1.0),
    ("ij", "k", (2,), 1.0),
    ("ik", "j", (1,), 1.0),
    ("ik", "j", (3,), 1.0),
    ("jk", "i", (2,), 1.0),
    ("jk", "i", (3,), 1.0),
    ("jk", "i", (1,), 1.0),
    ("ik", "j", (2,), 1.0),
    ("ij", "k", (3,), 1.0),
]

# Bell labels 0..3 = x1, x2, y1, y2; the state is phi_{x1+x2, y1+y2}
_BELL_NAMES = ("x1", "x2", "y1", "y2")
_BELL_IDENTITIES = [
    # inner products -> delta
    ("", "x1", (1, 2), 1.0),
    ("", "x2", (1, 2), 1.0),
    ("", "y1", (1, 2), 1.0),
    ("", "y2", (1, 2), 1.0),
    # trace out site 2
    ("x2", "x1", (2,), 1.0),
    ("x1", "x2", (2,), 1.0),
    # trace out site 1
    ("y1", "x1", (1,), 1.0),
    ("y2", "x1", (1,), 1.0),
    ("y1", "x2", (1,), 1.0),
    ("y2", "x2", (1,), 1.0),
    # completeness, nothing traced
    ("x1y1", "", (), 1.0),
    ("x1y2", "", (), 1.0),
    ("x2y1", "", (), 1.0),
    ("x2y2", "", (), 1.0),
]

# psi labels 0, 1, 2 = i, j, k; every entry scaled by 1/d
_PSI_IDENTITIES = [
    ("j", (1,)),
    ("k", (1,)),
    ("j", (2,)),
    ("j", (3,)),
    ("k", (3,)),
]


def _labels(spec: str, names: Sequence[str]) -> list[int]:
    out, rest = [], spec
    while rest:
        for idx, nm in enumerate(names):
            if rest.startswith(nm):
                out.append(idx)
                rest = rest[len(nm) :]
                break
        else:
            raise ValueError(f"cannot parse label list {spec!r}")
    return out


def _ident_name(family: str, summed: str, primed: str, traced, extra: str = "") -> str:
    tr = "".join(str(s) for s in traced) or "-"
    return f"{family}{extra}: sum[{summed or '-'}] Tr_{tr} primed[{primed or '-'}]"


def psi_suite_params(f: Field) -> tuple[int, int]:
    """(alpha, beta) indices used for the psi identities: alpha = 2, beta = 1."""
    return 2, 1


def appendix_suite(
    tol: float = 1e-12,
    ghz: Callable[[int, int, int], SparseState] = ghz_state,
    bell: Callable[[int, int], SparseState] = bell_state,
    psi_orders: Sequence[int] = (4, 5, 7),
) -> list[IdentityResult]:
    """Evaluate every GHZ, Bell and psi trace identity over all free labels.

    ``ghz`` and ``bell`` may be replaced to run the suite against modified
    state families (a perturbed family must fail).
    """
    from .ffield import field_of_order

    results = []
    ijk = ("i", "j", "k")
    for summed, primed, traced, scale in _GHZ_IDENTITIES:
        keep = _complement(traced, 3)
        results.append(
            _family_identity(
                _ident_name("GHZ", summed, primed, traced),
                lambda lab: ghz(*lab),
                3,
                2,
                _labels(summed, ijk),
                _labels(primed, ijk),
                keep,
                scale,
                tol,
            )
        )

    def bell_of(lab):
        x1, x2, y1, y2 = lab
        return bell((x1 + x2) % 2, (y1 + y2) % 2)

    for summed, primed, traced, scale in _BELL_IDENTITIES:
        keep = _complement(traced, 2)
        results.append(
            _family_identity(
                _ident_name("Bell", summed, primed, traced),
                bell_of,
                4,
                2,
                _labels(summed, _BELL_NAMES),
                _labels(primed, _BELL_NAMES),
                keep,
                scale,
                tol,
            )
        )

    for d in psi_orders:
        f = field_of_order(d)
        alpha, beta = psi_suite_params(f)
        for summed, traced in _PSI_IDENTITIES:
            results.append(
                _family_identity(
                    _ident_name("psi", summed, "", traced, extra=f"[d={d}]"),
                    lambda lab, f=f: psi_state(f, *lab, alpha, beta),
                    3,
                    d,
                    _labels(summed, ijk),
                    [],
                    _complement(traced, 3),
                    1.0 / d,
                    tol,
                )
            )
    return results
