"""Exact Jack_α probabilities on partitions of n."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .errors import DomainError
from .partitions import (
    Partition,
    as_partition,
    char_statistic,
    enumerate_partitions,
    exact_alpha,
    format_scalar,
    hook_data,
    w_normalizer_sq,
)
from .zero_bias import AtomicDistribution


class HookProducts(NamedTuple):
    c_low: Fraction
    c_high: Fraction


def _integer_hook_products(lam: Partition, alpha: Fraction) -> tuple[int, int]:
    # with α = p/q: q·(αa+l+1) = pa + q(l+1) and q·(αa+l+α) = pa + ql + p
    p, q = alpha.numerator, alpha.denominator
    low = high = 1
    for s in lam.cells():
        a, l, _ = hook_data(lam, s)
        low *= p * a + q * (l + 1)
        high *= p * a + q * l + p
    return low, high


def hook_products(lam: Partition, alpha) -> HookProducts:
    alpha = exact_alpha(alpha)
    lam = as_partition(lam)
    low, high = _integer_hook_products(lam, alpha)
    scale = alpha.denominator ** lam.n
    return HookProducts(Fraction(low, scale), Fraction(high, scale))


def jack_probability(lam: Partition, alpha) -> Fraction:
    """P_α(λ) = α^n n! / Π_s (α a(s) + l(s) + 1)(α a(s) + l(s) + α)."""
    alpha = exact_alpha(alpha)
    lam = as_partition(lam)
    n = lam.n
    low, high = _integer_hook_products(lam, alpha)
    p, q = alpha.numerator, alpha.denominator
    return Fraction(p**n * q**n * math.factorial(n), low * high)


@dataclass(frozen=True)
class PartitionLaw:
    n: int
    alpha: Fraction
    entries: tuple[tuple[Partition, Fraction], ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def probability(self, lam) -> Fraction:
        lam = as_partition(lam)
        for mu, pr in self.entries:
            if mu == lam:
                return pr
        return Fraction(0)

    def expectation(self, f) -> Fraction:
        return sum((pr * f(lam) for lam, pr in self.entries), Fraction(0))

    def statistic_law(self) -> AtomicDistribution:
        """Exact law of S(λ, α) (unnormalized, rational atoms)."""
        return AtomicDistribution.from_pairs(
            (char_statistic(lam, self.alpha), pr) for lam, pr in self.entries
        )

    def w_law(self) -> AtomicDistribution:
        """Law of W = S / sqrt(α·C(n,2)) with float atoms and exact masses."""
        norm = w_normalizer_sq(self.n, self.alpha)
        scale = 1.0 / math.sqrt(norm) if norm else 0.0
        s_law = self.statistic_law()
        return AtomicDistribution(
            tuple(float(a) * scale for a in s_law.atoms), s_law.masses
        )

    def to_json(self) -> dict:
        norm = w_normalizer_sq(self.n, self.alpha)
        root = math.sqrt(norm) if norm else 0.0
        entries = []
        for lam, pr in self.entries:
            s = char_statistic(lam, self.alpha)
            entries.append(
                {
                    "partition": str(lam),
                    "prob": format_scalar(pr),
                    "w": float(s) / root if root else 0.0,
                }
            )
        return {"n": self.n, "alpha": format_scalar(self.alpha), "entries": entries}


@lru_cache(maxsize=256)
def _distribution(n: int, alpha: Fraction) -> PartitionLaw:
    entries = tuple((lam, jack_probability(lam, alpha)) for lam in enumerate_partitions(n))
    return PartitionLaw(n, alpha, entries)


def jack_distribution(n: int, alpha) -> PartitionLaw:
    alpha = exact_alpha(alpha)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    enumerate_partitions(n)  # raises on the size limit before touching the cache
    return _distribution(n, alpha)


class RowTail(NamedTuple):
    exact: Fraction
    bound_factorial: float
    bound_stirling: float

    def holds(self) -> bool:
        return (
            float_down(self.exact) <= self.bound_factorial
            and self.bound_factorial <= self.bound_stirling * (1 + 1e-12)
        )


def float_down(x: Fraction) -> float:
    """Largest double not exceeding ``x``."""
    f = float(x)
    if Fraction(f) > x:
        f = math.nextafter(f, -math.inf)
    return f


def row_tail_bounds(n: int, alpha, l: int) -> tuple[float, float]:
    """(n/α)^l·αl/(l!)² and (α/2π)(ne²/(αl²))^l, evaluated through logarithms."""
    a = float(alpha)
    log_factorial = l * math.log(n / a) + math.log(a * l) - 2 * math.lgamma(l + 1)
    log_stirling = math.log(a / (2 * math.pi)) + l * math.log(n * math.e**2 / (a * l * l))
    return math.exp(log_factorial), math.exp(log_stirling)


def row_tail(n: int, alpha, l: int) -> RowTail:
    """Exact P_α(λ_1 = l) with its two analytic envelopes."""
    alpha = exact_alpha(alpha)
    if not 1 <= l <= n:
        raise DomainError(f"need 1 <= l <= n, got l={l}, n={n}")
    law = jack_distribution(n, alpha)
    exact = sum((pr for lam, pr in law if lam.parts[0] == l), Fraction(0))
    return RowTail(exact, *row_tail_bounds(n, alpha, l))
