"""Exact invariant suites behind ``jackstein verify``.

Each suite returns a list of :class:`BoundReport`; identity checks carry no
lhs/rhs and pass or fail outright.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import JacksteinError
from .jack_measure import jack_distribution, jack_probability, row_tail
from .kerov_growth import coherent_law, eta_law, expected_eta_moments, step_kernel
from .partitions import (
    alpha_content,
    char_statistic,
    dimension,
    enumerate_partitions,
    w_normalizer_sq,
)
from .reports import FAIL, PASS, BoundReport, judge
from .stein_bounds import (
    tail_envelope_check,
    gx_property_check,
    jack_tail_report,
    mills_check,
    uniform_bound_check,
)
from .zero_bias import (
    AtomicDistribution,
    centered_bernoulli,
    kappa_lemma_check,
    rademacher,
    rosenthal_check,
    zero_bias_transform,
)


def check(name: str, ok: bool, **context) -> BoundReport:
    return BoundReport(name, None, None, PASS if ok else FAIL, context)


def _count_partitions(n: int) -> int:
    # coin-change count, independent of the generator
    ways = [1] + [0] * n
    for part in range(1, n + 1):
        for total in range(part, n + 1):
            ways[total] += ways[total - part]
    return ways[n]


def partitions_suite(n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    out = []
    for n in range(n_max + 1):
        parts = enumerate_partitions(n)
        out.append(check("partition_count", len(parts) == _count_partitions(n), n=n))
        out.append(check("dimension_squares",
                         sum(dimension(l) ** 2 for l in parts) == math.factorial(n), n=n))
        for a in alphas:
            contents = all(
                char_statistic(l, a) == sum(alpha_content(s, a) for s in l.cells()) for l in parts
            )
            dual = all(char_statistic(l.conjugate, 1 / a) == -char_statistic(l, a) / a for l in parts)
            out.append(check("content_sum", contents, n=n, alpha=str(a)))
            out.append(check("transpose_statistic", dual, n=n, alpha=str(a)))
    return out


def jack_suite(n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    out = []
    for n in range(1, n_max + 1):
        for a in alphas:
            law = jack_distribution(n, a)
            out.append(check("normalization", sum(p for _, p in law) == 1, n=n, alpha=str(a)))
            out.append(check("transpose_duality",
                             all(jack_probability(l.conjugate, 1 / a) == p for l, p in law),
                             n=n, alpha=str(a)))
            s1 = law.expectation(lambda l: char_statistic(l, a))
            s2 = law.expectation(lambda l: char_statistic(l, a) ** 2)
            out.append(check("w_moments", s1 == 0 and s2 == w_normalizer_sq(n, a), n=n, alpha=str(a)))
            for l in range(1, n + 1):
                tail = row_tail(n, a, l)
                out.append(check("row_tail", tail.holds(), n=n, alpha=str(a), l=l,
                                 exact=str(tail.exact), factorial_bound=tail.bound_factorial))
        law1 = jack_distribution(n, 1)
        out.append(check("plancherel",
                         all(p == Fraction(dimension(l) ** 2, math.factorial(n)) for l, p in law1),
                         n=n))
    return out


def kerov_suite(n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    out = []
    for a in alphas:
        for m in range(n_max + 1):
            rows_ok = all(step_kernel(nu, a).total() == 1 for nu in enumerate_partitions(m))
            out.append(check("kernel_row_sum", rows_ok, n=m + 1, alpha=str(a)))
        for n in range(1, n_max + 1):
            pushed = coherent_law(n, a)
            law = jack_distribution(n, a)
            ok = len(pushed) == len(law) and all(pushed.get(l) == p for l, p in law)
            out.append(check("kernel_coherence", ok, n=n, alpha=str(a)))
        for n in range(2, n_max + 1):
            eta = eta_law(n, a)
            got = (eta.contents.mean(), eta.even_moment(2), eta.even_moment(4))
            out.append(check("eta_moments", got == expected_eta_moments(n, a), n=n, alpha=str(a)))
            star_ok = eta.zero_biased_second_moment() == got[2] / (3 * got[1])
            out.append(check("eta_star_second_moment", star_ok, n=n, alpha=str(a)))
    return out


def identity_battery(n_max: int, alphas: Sequence[Fraction]) -> list[AtomicDistribution]:
    laws = [
        rademacher(),
        centered_bernoulli(Fraction(1, 4)),
        centered_bernoulli(Fraction(1, 10)),
        AtomicDistribution((-1, 1, 3), (Fraction(5, 8), Fraction(1, 4), Fraction(1, 8))),
        AtomicDistribution((-1, 0, 1), (Fraction(1, 3),) * 3),
        AtomicDistribution((-3, -1, 2, 5), (Fraction(1, 4), Fraction(3, 8), Fraction(1, 4), Fraction(1, 8))),
    ]
    for a in alphas:
        for n in range(2, n_max + 1):
            laws.append(eta_law(n, a).contents)
    return laws


def zero_bias_identities(law: AtomicDistribution, k_max: int = 7) -> list[BoundReport]:
    z = zero_bias_transform(law)
    var = law.variance()
    out = []
    for k in range(1, k_max + 1):
        lhs = law.moment(k + 1)
        rhs = var * k * z.moment(k - 1)
        if law.exact:
            out.append(check("zero_bias_identity", lhs == rhs, k=k, atoms=len(law)))
        else:
            out.append(judge("zero_bias_identity", abs(float(lhs - rhs)), 1e-9 * max(1.0, abs(float(lhs))),
                             slack=0.0, k=k))
    levels = [float(g) for g in z.density_levels]
    out.append(check("zero_bias_density",
                     min(levels) >= 0 and sum(g * (hi - lo) for lo, hi, g in z.pieces()) == 1
                     if z.exact else min(levels) >= 0))
    return out


def zero_bias_suite(n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    out = []
    for law in identity_battery(n_max, alphas):
        out.extend(zero_bias_identities(law))
    for p in (8.0 + k / 10.0 for k in range(1, 3921)):
        out.extend(r for r in kappa_lemma_check(p) if r.verdict == FAIL)
    out.append(check("kappa_grid_scanned", True, points=3920))
    for law in (rademacher(), centered_bernoulli(Fraction(1, 4))):
        for m in (1, 2, 4):
            for p in (2, 3, 4, 6):
                out.extend(rosenthal_check([law] * m, p, strict=False))
    return out


def stein_suite(n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    out = []
    for a in alphas:
        for n in range(3, n_max + 1):
            out.extend(uniform_bound_check(n, a))
            if a >= 1 and n >= 4:
                for q in (2, 4):
                    out.extend(jack_tail_report(n, a, q))
    xs = [0.5 * k for k in range(1, 11)]
    out.extend(gx_property_check(xs, np.round(np.arange(-1000, 1001) * 0.01, 10)))
    out.append(mills_check([0.1 * k for k in range(1, 101)]))
    out.append(tail_envelope_check(np.linspace(0.0, 10.0, 100001)))
    return out


SUITES: dict[str, Callable[[int, Sequence[Fraction]], list[BoundReport]]] = {
    "partitions": partitions_suite,
    "jack": jack_suite,
    "kerov": kerov_suite,
    "zerobias": zero_bias_suite,
    "stein": stein_suite,
}


def run_suite(name: str, n_max: int, alphas: Sequence[Fraction]) -> list[BoundReport]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for key in names:
        try:
            out.extend(SUITES[key](n_max, alphas))
        except JacksteinError as exc:
            out.append(check(f"{key}_suite", False, error=str(exc)))
    return out
