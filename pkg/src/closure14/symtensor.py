"""Symmetric tensor algebra over 3-space with exact combinatorics.

Fully symmetric tensors are stored by sorted index multiset, so symmetry
holds by construction.  Symmetrized Kronecker-delta products are built by
pairing enumeration with exact rational entries; contraction converts to
floating point.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ArityError, ParityError

DIM = 3
MAX_DELTA_RANK = 12

_vector_basis = [np.eye(DIM)[k] for k in range(DIM)]


def _double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    return math.prod(range(n, 0, -2))


@dataclass(frozen=True)
class SymTensor:
    """Fully symmetric rank-n tensor over 3-space, multiset indexed.

    ``values`` maps sorted index tuples (entries in 0..2) to reals; a rank-0
    tensor holds the single entry keyed by the empty tuple.
    """

    rank: int
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        expected = math.comb(self.rank + DIM - 1, DIM - 1)
        if len(self.values) != expected:
            raise ValueError(
                f"rank-{self.rank} tensor needs {expected} entries, got {len(self.values)}"
            )

    def __getitem__(self, idx):
        if self.rank == 0:
            return self.values[()]
        if isinstance(idx, int):
            idx = (idx,)
        return self.values[tuple(sorted(idx))]

    @classmethod
    def from_function(cls, rank: int, fn) -> "SymTensor":
        vals = {
            key: fn(key)
            for key in itertools.combinations_with_replacement(range(DIM), rank)
        }
        return cls(rank, vals)


class SymMatrix:
    """Symmetric 3x3 matrix; symmetry is structural."""

    __slots__ = ("_a",)

    def __init__(self, array):
        a = np.asarray(array, dtype=float)
        if a.shape != (DIM, DIM):
            raise ValueError("SymMatrix needs a 3x3 array")
        self._a = 0.5 * (a + a.T)
        self._a.setflags(write=False)

    @classmethod
    def diag(cls, d1, d2, d3) -> "SymMatrix":
        return cls(np.diag([d1, d2, d3]))

    @classmethod
    def zero(cls) -> "SymMatrix":
        return cls(np.zeros((DIM, DIM)))

    @classmethod
    def identity(cls) -> "SymMatrix":
        return cls(np.eye(DIM))

    def as_array(self) -> np.ndarray:
        return self._a

    def __getitem__(self, ij):
        return self._a[ij]

    def trace(self) -> float:
        return float(np.trace(self._a))

    def norm(self) -> float:
        return float(np.linalg.norm(self._a))

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self._a + other._a)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self._a - other._a)

    def __mul__(self, c: float) -> "SymMatrix":
        return SymMatrix(self._a * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and np.array_equal(self._a, other._a)

    def __repr__(self):
        return f"SymMatrix({self._a.tolist()})"


def deviator(m: SymMatrix) -> SymMatrix:
    """Traceless part m - (1/3) tr(m) I."""
    return SymMatrix(m.as_array() - (m.trace() / DIM) * np.eye(DIM))


# --- symmetrized delta products ------------------------------------------

_delta_lock = threading.Lock()
_delta_cache: dict[int, SymTensor] = {}
_pairing_cache: dict[int, tuple] = {}


def _pairings(n_points: int) -> tuple:
    """All perfect matchings of range(n_points), as tuples of index pairs."""
    with _delta_lock:
        cached = _pairing_cache.get(n_points)
    if cached is not None:
        return cached

    def rec(points):
        if not points:
            yield ()
            return
        a = points[0]
        for j in range(1, len(points)):
            b = points[j]
            rest = points[1:j] + points[j + 1 :]
            for tail in rec(rest):
                yield ((a, b),) + tail

    result = tuple(rec(tuple(range(n_points))))
    with _delta_lock:
        _pairing_cache[n_points] = result
    return result


def sym_delta(rank: int) -> SymTensor:
    """Symmetrized product of rank/2 Kronecker deltas.

    Entries are exact rationals: for an index multiset the value is the
    number of perfect matchings pairing equal indices, divided by
    (rank-1)!! (the number of distinct delta pairings).
    """
    if rank < 0 or rank % 2:
        raise ParityError(f"sym_delta requires an even non-negative rank, got {rank}")
    if rank > MAX_DELTA_RANK:
        raise ValueError(f"rank {rank} exceeds configured maximum {MAX_DELTA_RANK}")
    with _delta_lock:
        cached = _delta_cache.get(rank)
    if cached is not None:
        return cached

    total = _double_factorial(rank - 1)

    def entry(key):
        counts = [key.count(i) for i in range(DIM)]
        if any(c % 2 for c in counts):
            return Fraction(0)
        matchings = math.prod(_double_factorial(c - 1) for c in counts)
        return Fraction(matchings, total)

    t = SymTensor.from_function(rank, entry)
    with _delta_lock:
        _delta_cache.setdefault(rank, t)
        return _delta_cache[rank]


def sym_delta_bruteforce(rank: int) -> SymTensor:
    """Oracle: average of delta products over all index permutations."""
    if rank % 2:
        raise ParityError("odd rank")

    def entry(key):
        total = Fraction(0)
        for perm in itertools.permutations(key):
            prod = 1
            for i in range(0, rank, 2):
                if perm[i] != perm[i + 1]:
                    prod = 0
                    break
            total += prod
        return total / math.factorial(rank)

    return SymTensor.from_function(rank, entry)


# --- contraction ----------------------------------------------------------


def _slot_width(slot) -> int:
    if isinstance(slot, SymMatrix):
        return 2
    arr = np.asarray(slot, dtype=float)
    if arr.shape == (DIM,):
        return 1
    raise ArityError(f"slot must be a 3-vector or SymMatrix, got shape {arr.shape}")


def contract(t: SymTensor, slots, free_indices: int = 0):
    """Contract a symmetric tensor against vectors and symmetric matrices.

    Matrices consume two adjacent indices.  With ``free_indices=1`` the
    first index of ``t`` stays open and a 3-vector is returned.
    """
    if free_indices not in (0, 1):
        raise ArityError("free_indices must be 0 or 1")
    widths = [_slot_width(s) for s in slots]
    if sum(widths) + free_indices != t.rank:
        raise ArityError(
            f"slots cover {sum(widths)} indices (+{free_indices} free) "
            f"but tensor has rank {t.rank}"
        )
    if free_indices:
        return np.array([contract(t, [_vector_basis[k], *slots]) for k in range(DIM)])

    arrays = [
        s.as_array() if isinstance(s, SymMatrix) else np.asarray(s, dtype=float)
        for s in slots
    ]
    total = 0.0
    for idx in itertools.product(range(DIM), repeat=t.rank):
        tv = t.values[tuple(sorted(idx))]
        if tv == 0:
            continue
        prod = float(tv)
        pos = 0
        for arr, w in zip(arrays, widths):
            if w == 1:
                prod *= arr[idx[pos]]
            else:
                prod *= arr[idx[pos], idx[pos + 1]]
            pos += w
        total += prod
    return total


def delta_contract(vectors, matrices, free: bool = False):
    """Fast contraction of sym_delta against vectors/symmetric matrices.

    Evaluates the (2n-1)!! delta pairings directly; each pairing factors
    into chains (vector-matrix...-vector products) and cycles (traces).
    Equivalent to ``contract(sym_delta(rank), slots)`` but avoiding the
    3^rank index sweep.
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    mats = [m.as_array() if isinstance(m, SymMatrix) else np.asarray(m, dtype=float) for m in matrices]
    rank = len(vecs) + 2 * len(mats) + (1 if free else 0)
    if free:
        return np.array(
            [delta_contract([_vector_basis[k], *vectors], matrices) for k in range(DIM)]
        )
    if rank % 2:
        return 0.0
    if rank == 0:
        return 1.0

    # node layout: vector j -> node j; matrix m -> nodes (base+2m, base+2m+1)
    nv = len(vecs)
    partner = {}
    for m in range(len(mats)):
        a, b = nv + 2 * m, nv + 2 * m + 1
        partner[a] = b
        partner[b] = a

    def node_obj(n):
        if n < nv:
            return ("v", vecs[n])
        return ("m", mats[(n - nv) // 2])

    total = 0.0
    pairings = _pairings(rank)
    for pairing in pairings:
        match = {}
        for a, b in pairing:
            match[a] = b
            match[b] = a
        seen = set()
        prod = 1.0
        for start in range(rank):
            if start in seen:
                continue
            kind, obj = node_obj(start)
            if kind == "v":
                # walk chain: vector -delta- [matrix -delta-]* vector
                seen.add(start)
                acc = obj
                node = match[start]
                while True:
                    k2, obj2 = node_obj(node)
                    seen.add(node)
                    if k2 == "v":
                        prod *= float(acc @ obj2)
                        break
                    other = partner[node]
                    seen.add(other)
                    acc = acc @ obj2
                    node = match[other]
            else:
                # cycle through matrices only
                if match[start] == partner[start]:
                    seen.add(start)
                    seen.add(partner[start])
                    prod *= float(np.trace(obj))
                    continue
                acc = np.eye(DIM)
                node = start
                while node not in seen:
                    seen.add(node)
                    other = partner[node]
                    seen.add(other)
                    acc = acc @ node_obj(node)[1]
                    node = match[other]
                prod *= float(np.trace(acc))
        total += prod
    return total / len(pairings)
