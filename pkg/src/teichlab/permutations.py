"""Permutations on d letters: irreducibility, rotations, the type-W class,
and the alternating bilinear form attached to an interval exchange.

Permutations are 1-indexed throughout the public API: ``p(i)`` is the image
of letter i for 1 <= i <= d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, NotIrreducible


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1, ..., d}, stored as the image tuple (pi(1), ..., pi(d))."""

    images: tuple[int, ...]

    def __post_init__(self):
        d = len(self.images)
        if d < 1:
            raise ValueError("empty permutation")
        if sorted(self.images) != list(range(1, d + 1)):
            raise ValueError(f"not a bijection of 1..{d}: {self.images}")
        object.__setattr__(self, "images", tuple(int(v) for v in self.images))

    @property
    def d(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.d:
            raise ValueError(f"letter {i} out of range 1..{self.d}")
        return self.images[i - 1]

    def inverse(self, j: int) -> int:
        """The letter i with pi(i) == j."""
        if not 1 <= j <= self.d:
            raise ValueError(f"letter {j} out of range 1..{self.d}")
        return self.images.index(j) + 1

    def inverse_permutation(self) -> "Permutation":
        inv = [0] * self.d
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def to_json(self) -> list[int]:
        return list(self.images)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "Permutation":
        return cls(tuple(int(v) for v in data))

    @classmethod
    def reversal(cls, d: int) -> "Permutation":
        """The permutation (d, d-1, ..., 1)."""
        return cls(tuple(range(d, 0, -1)))

    def __str__(self):
        return "(" + ",".join(str(v) for v in self.images) + ")"


def is_irreducible(p: Permutation) -> bool:
    """True iff no proper prefix {1..j}, j < d, is invariant under p."""
    running_max = 0
    for j in range(1, p.d):
        running_max = max(running_max, p(j))
        if running_max == j:
            return False
    return True


def is_rotation(p: Permutation) -> bool:
    """True iff p(i+1) = p(i) + 1 mod d for 1 <= i < d (values in 1..d)."""
    d = p.d
    return all(p(i + 1) == p(i) % d + 1 for i in range(1, d))


@dataclass(frozen=True)
class TypeWResult:
    type_w: bool
    trace: tuple[int, ...]


def classify_type_w(p: Permutation) -> TypeWResult:
    """Run the inductive a_p sequence deciding membership in the type-W class.

    Start from a_0 = 1; stop as soon as the current value lies in
    {p^{-1}(1), d+1}; otherwise step via a -> p^{-1}(p(a) - 1) + 1.  The
    permutation is type W when the stopping value equals p^{-1}(1).  The full
    trace is returned for audit.  The step map is injective, so the sequence
    cannot revisit a value before stopping; the d+1 guard is a diagnostic
    against that reasoning being wrong, not an expected path.
    """
    if not is_irreducible(p):
        raise NotIrreducible(f"type W is only defined for irreducible permutations, got {p}")
    d = p.d
    target = p.inverse(1)
    stop = {target, d + 1}
    a = 1
    trace = [a]
    while a not in stop:
        if len(trace) > d + 1:
            raise AssertionError(f"a_p sequence failed to stop within d+1 steps for {p}: {trace}")
        a = p.inverse(p(a) - 1) + 1
        trace.append(a)
    return TypeWResult(type_w=(a == target), trace=tuple(trace))


@dataclass(frozen=True)
class QForm:
    """Matrix of the alternating form Q attached to a permutation.

    Q(e_i, e_j) = 1 when i > j and pi(i) < pi(j), -1 in the mirrored case,
    0 otherwise.  For an IET with lengths lam, T(x) - x = Q(lam, e_i) on the
    i-th interval.
    """

    d: int
    matrix: tuple[tuple[int, ...], ...]

    def entry(self, i: int, j: int) -> int:
        """Q(e_i, e_j), 1-indexed."""
        return self.matrix[i - 1][j - 1]


def build_q_form(p: Permutation) -> QForm:
    d = p.d
    rows = []
    for i in range(1, d + 1):
        row = []
        for j in range(1, d + 1):
            if i > j and p(i) < p(j):
                row.append(1)
            elif i < j and p(i) > p(j):
                row.append(-1)
            else:
                row.append(0)
        rows.append(tuple(row))
    return QForm(d=d, matrix=tuple(rows))


def q_evaluate(q: QForm, u: Sequence, v: Sequence) -> Fraction:
    """Exact bilinear evaluation u^T Q v; accepts ints/Fractions."""
    if len(u) != q.d or len(v) != q.d:
        raise DimensionMismatch(f"expected vectors of length {q.d}, got {len(u)} and {len(v)}")
    total = Fraction(0)
    for i in range(q.d):
        ui = Fraction(u[i])
        if ui == 0:
            continue
        row = q.matrix[i]
        acc = Fraction(0)
        for j in range(q.d):
            if row[j]:
                acc += row[j] * Fraction(v[j])
        total += ui * acc
    return total


def basis_vector(d: int, i: int) -> tuple[int, ...]:
    """Standard basis vector e_i (1-indexed)."""
    return tuple(1 if k == i - 1 else 0 for k in range(d))
