"""Integer partitions, Young-diagram cells and the Jack character statistic.

Partitions are immutable part tuples with a lazily computed conjugate.  Cells
are 1-based ``(row, col)`` pairs.  Exact scalars are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Union

from .errors import DomainError, ResourceError

Scalar = Union[Fraction, float]

DEFAULT_MAX_N = 40
MAX_N_ENV = "JACKSTEIN_MAX_N"


class Cell(NamedTuple):
    row: int
    col: int

    def __str__(self) -> str:
        return f"({self.row},{self.col})"


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise DomainError(f"parts must be positive: {list(parts)}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise DomainError(f"parts must be weakly decreasing: {list(parts)}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise DomainError(f"partition must look like [3,2,1]: {text!r}")
        inner = body[1:-1].strip()
        if not inner:
            return cls(())
        try:
            return cls(tuple(int(tok) for tok in inner.split(",")))
        except ValueError:
            raise DomainError(f"bad partition literal: {text!r}") from None

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.parts)) + "]"

    def __repr__(self) -> str:
        return f"Partition({list(self.parts)})"

    @cached_property
    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def cells(self) -> Iterable[Cell]:
        for i, p in enumerate(self.parts, start=1):
            for j in range(1, p + 1):
                yield Cell(i, j)

    def contains(self, s: Cell) -> bool:
        return 1 <= s.row <= len(self.parts) and 1 <= s.col <= self.parts[s.row - 1]

    def add_cell(self, s: Cell) -> "Partition":
        parts = list(self.parts)
        if s.row == len(parts) + 1 and s.col == 1:
            parts.append(1)
        elif 1 <= s.row <= len(parts) and s.col == parts[s.row - 1] + 1:
            parts[s.row - 1] += 1
        else:
            raise DomainError(f"cannot add cell {s} to {self}")
        return Partition(tuple(parts))


def as_partition(obj) -> Partition:
    if isinstance(obj, Partition):
        return obj
    if isinstance(obj, str):
        return Partition.parse(obj)
    return Partition(tuple(obj))


_SCALAR_RE = re.compile(r"^\s*[+-]?\d+\s*(/\s*\d+\s*)?$")


def parse_scalar(text: str) -> Scalar:
    """Parse ``"p/q"`` or ``"p"`` as an exact rational, anything else as a float."""
    if _SCALAR_RE.match(text):
        try:
            return Fraction(text.replace(" ", ""))
        except ZeroDivisionError:
            raise DomainError(f"zero denominator: {text!r}") from None
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"not a number: {text!r}") from None


def format_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def check_alpha(alpha) -> Scalar:
    """Validate α > 0; integers and strings become exact, floats stay floats."""
    if isinstance(alpha, str):
        alpha = parse_scalar(alpha)
    if isinstance(alpha, bool):
        raise DomainError("alpha must be a number")
    if isinstance(alpha, int):
        alpha = Fraction(alpha)
    if not isinstance(alpha, (Fraction, float)):
        raise DomainError(f"alpha must be rational or float, got {type(alpha).__name__}")
    if not alpha > 0 or (isinstance(alpha, float) and not math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive and finite, got {alpha}")
    return alpha


def exact_alpha(alpha) -> Fraction:
    alpha = check_alpha(alpha)
    if not isinstance(alpha, Fraction):
        raise DomainError(f"exact rational alpha required, got float {alpha!r}")
    return alpha


def max_n() -> int:
    raw = os.environ.get(MAX_N_ENV)
    if raw is None:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"{MAX_N_ENV} must be an integer, got {raw!r}") from None


def _partitions_desc(n: int, largest: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_desc(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[Partition, ...]:
    return tuple(Partition(p) for p in _partitions_desc(n, n))


def enumerate_partitions(n: int, limit: int | None = None) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse-lexicographic order."""
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    limit = max_n() if limit is None else limit
    if n > limit:
        raise ResourceError(
            f"n={n} exceeds the enumeration limit {limit} (set {MAX_N_ENV} to raise it)"
        )
    return _enumerate(n)


class HookData(NamedTuple):
    arm: int
    leg: int
    hook: int


def hook_data(lam: Partition, s: Cell) -> HookData:
    lam = as_partition(lam)
    s = Cell(*s)
    if not lam.contains(s):
        raise DomainError(f"cell {s} lies outside {lam}")
    arm = lam.parts[s.row - 1] - s.col
    leg = lam.conjugate.parts[s.col - 1] - s.row
    return HookData(arm, leg, arm + leg + 1)


def dimension(lam: Partition) -> int:
    """Number of standard tableaux of shape ``lam`` by the hook formula."""
    lam = as_partition(lam)
    hooks = math.prod(hook_data(lam, s).hook for s in lam.cells())
    return math.factorial(lam.n) // hooks


def alpha_content(s: Cell, alpha) -> Scalar:
    alpha = check_alpha(alpha)
    s = Cell(*s)
    return alpha * (s.col - 1) - (s.row - 1)


def corners(lam: Partition) -> tuple[list[Cell], list[Cell]]:
    """Addable and removable cells, each sorted by row."""
    parts = as_partition(lam).parts
    m = len(parts)
    addable, removable = [], []
    for i in range(m + 1):
        below = parts[i] if i < m else 0
        if i == 0 or parts[i - 1] > below:
            addable.append(Cell(i + 1, below + 1))
    for i in range(m):
        if i == m - 1 or parts[i] > parts[i + 1]:
            removable.append(Cell(i + 1, parts[i]))
    return addable, removable


def char_statistic(lam: Partition, alpha) -> Scalar:
    """S(λ, α) = Σ_i (α·C(λ_i, 2) − C(λ'_i, 2)), the sum of all α-contents."""
    alpha = check_alpha(alpha)
    lam = as_partition(lam)
    rows = sum(p * (p - 1) // 2 for p in lam.parts)
    cols = sum(p * (p - 1) // 2 for p in lam.conjugate.parts)
    return alpha * rows - cols


def w_normalizer_sq(n: int, alpha) -> Scalar:
    """α·C(n,2), the variance of S under the Jack measure."""
    return check_alpha(alpha) * (n * (n - 1) // 2)


def w_value(lam: Partition, alpha) -> float:
    lam = as_partition(lam)
    norm = w_normalizer_sq(lam.n, alpha)
    if norm == 0:
        return 0.0
    return float(char_statistic(lam, alpha)) / math.sqrt(norm)
