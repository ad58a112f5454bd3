"""One-box growth kernel for the Jack_α measure.

Adding the corner (r, c) to ν ⊢ n−1 has probability
ψ'(ν→λ)·c_low(ν)/c_low(λ), where ψ' is a product over the cells above the
new box in its column.  Composing n steps from the empty partition gives the
Jack_α law on partitions of n; the exact tests enforce this coherence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _growth_kernel as gk
from .errors import DomainError, VerificationError
from .jack_measure import jack_distribution
from .partitions import (
    Cell,
    Partition,
    alpha_content,
    as_partition,
    char_statistic,
    check_alpha,
    corners,
    enumerate_partitions,
    exact_alpha,
    format_scalar,
    w_normalizer_sq,
)
from .reports import BoundReport, PASS
from .zero_bias import AtomicDistribution, zero_bias_transform


@dataclass(frozen=True)
class KernelRow:
    source: Partition
    targets: tuple[tuple[Cell, Partition, Fraction], ...]

    def total(self):
        return sum(p for _, _, p in self.targets)

    def probability(self, lam) -> Fraction:
        lam = as_partition(lam)
        for _, mu, p in self.targets:
            if mu == lam:
                return p
        return Fraction(0)


def _arm_leg(nu: Partition, row: int, col: int) -> tuple[int, int]:
    return nu.parts[row - 1] - col, nu.conjugate.parts[col - 1] - row


def _require_addable(nu: Partition, corner: Cell) -> Cell:
    corner = Cell(*corner)
    if corner not in corners(nu)[0]:
        raise DomainError(f"{corner} is not an addable corner of {nu}")
    return corner


def psi_prime(nu: Partition, corner: Cell, alpha):
    """Π over cells (i, c), i < r, of (αa+l+α)(αa+l+2) / ((αa+l+1)(αa+l+1+α))."""
    alpha = check_alpha(alpha)
    nu = as_partition(nu)
    r, c = _require_addable(nu, corner)
    out = Fraction(1) if isinstance(alpha, Fraction) else 1.0
    for i in range(1, r):
        a, l = _arm_leg(nu, i, c)
        h = alpha * a + l
        out *= (h + alpha) * (h + 2) / ((h + 1) * (h + 1 + alpha))
    return out


def low_hook_ratio(nu: Partition, corner: Cell, alpha):
    """c_low(ν)/c_low(λ) from the cells sharing a row or column with the new box."""
    alpha = check_alpha(alpha)
    nu = as_partition(nu)
    r, c = _require_addable(nu, corner)
    out = Fraction(1) if isinstance(alpha, Fraction) else 1.0
    for j in range(1, c):
        a, l = _arm_leg(nu, r, j)
        h = alpha * a + l + 1
        out *= h / (h + alpha)
    for i in range(1, r):
        a, l = _arm_leg(nu, i, c)
        h = alpha * a + l + 1
        out *= h / (h + 1)
    return out


def transition_probability(nu: Partition, corner: Cell, alpha):
    return psi_prime(nu, corner, alpha) * low_hook_ratio(nu, corner, alpha)


def step_kernel(nu: Partition, alpha) -> KernelRow:
    alpha = check_alpha(alpha)
    nu = as_partition(nu)
    targets = tuple(
        (s, nu.add_cell(s), transition_probability(nu, s, alpha)) for s in corners(nu)[0]
    )
    return KernelRow(nu, targets)


@dataclass(frozen=True)
class PathSample:
    final: Partition
    contents: tuple
    w_value: float


def _normalized_w(total, n, alpha) -> float:
    norm = w_normalizer_sq(n, alpha)
    return float(total) / math.sqrt(norm) if norm else 0.0


def _exact_path(n: int, alpha: Fraction, rng: np.random.Generator) -> PathSample:
    nu = Partition(())
    contents = []
    for _ in range(n):
        row = step_kernel(nu, alpha)
        u = Fraction(float(rng.random()))
        acc = Fraction(0)
        pick = row.targets[-1]
        for target in row.targets:
            acc += target[2]
            if acc > u:
                pick = target
                break
        contents.append(alpha_content(pick[0], alpha))
        nu = pick[1]
    return PathSample(nu, tuple(contents), _normalized_w(sum(contents), n, alpha))


def sample_path(n: int, alpha, rng: np.random.Generator, exact: bool = False) -> PathSample:
    """Grow one partition of size n box by box.

    The default float path runs the compiled corner-residue recursion in
    double precision.  ``exact=True`` draws from the rational kernel instead
    (α must then be rational) and returns exact contents.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    alpha = check_alpha(alpha)
    if exact:
        return _exact_path(n, exact_alpha(alpha), rng)
    a = float(alpha)
    u = rng.random(n)
    rr, cc, nx, pv, xs, ys, ps = gk.work_arrays(n)
    contents = np.empty(n)
    _, _, k, head = gk.grow(n, a, u, rr, cc, nx, pv, xs, ys, ps, contents, True)
    rows, cols, _ = gk.corner_table(k, head, rr, cc, nx, ps)
    final = Partition(gk.final_parts(rows, cols))
    return PathSample(final, tuple(contents.tolist()), _normalized_w(contents.sum(), n, a))


@dataclass(frozen=True)
class EtaLaw:
    """Law of the α-content of the n-th box; η = content / sqrt(α·C(n,2))."""

    n: int
    alpha: Fraction
    contents: AtomicDistribution

    @property
    def normalizer_sq(self) -> Fraction:
        return w_normalizer_sq(self.n, self.alpha)

    @property
    def atoms(self):
        return list(self.contents)

    def eta_atoms(self) -> list[tuple[float, Fraction]]:
        root = math.sqrt(self.normalizer_sq)
        return [(float(c) / root, m) for c, m in self.contents]

    def even_moment(self, k: int) -> Fraction:
        """E η^k for even k, exactly."""
        if k % 2:
            raise DomainError("exact moments of η are rational only for even k")
        return self.contents.moment(k) / self.normalizer_sq ** (k // 2)

    def zero_biased_second_moment(self) -> Fraction:
        """E(η*)², using (cX)* = cX*."""
        return zero_bias_transform(self.contents).moment(2) / self.normalizer_sq


def eta_law(n: int, alpha) -> EtaLaw:
    alpha = exact_alpha(alpha)
    if n < 2:
        raise DomainError(f"eta_law needs n >= 2, got {n}")
    enumerate_partitions(n)
    prev = jack_distribution(n - 1, alpha)
    pairs = []
    for nu, p_nu in prev:
        for cell, _, p in step_kernel(nu, alpha).targets:
            pairs.append((alpha_content(cell, alpha), p_nu * p))
    mass = sum(p for _, p in pairs)
    if mass != 1:
        raise VerificationError(
            f"growth kernel loses mass at n={n}, alpha={alpha}",
            [f"total mass {format_scalar(mass)}, expected 1"],
        )
    return EtaLaw(n, alpha, AtomicDistribution.from_pairs(pairs))


def expected_eta_moments(n: int, alpha) -> tuple[Fraction, Fraction, Fraction]:
    """Closed forms for Eη, Eη², Eη⁴."""
    alpha = exact_alpha(alpha)
    m4 = Fraction(2, n * n) * (
        Fraction(4 * n - 6, n - 1) + 2 * (alpha - 1) ** 2 / (alpha * (n - 1))
    )
    return Fraction(0), Fraction(2, n), m4


def growth_moment_report(n: int, alpha) -> BoundReport:
    """Check Eη, Eη², Eη⁴ from the exact η law against their closed forms."""
    alpha = exact_alpha(alpha)
    law = eta_law(n, alpha)
    got = (law.contents.mean(), law.even_moment(2), law.even_moment(4))
    want = expected_eta_moments(n, alpha)
    names = ("E eta", "E eta^2", "E eta^4")
    failures = [
        f"{name}: got {format_scalar(g)}, expected {format_scalar(w)}"
        for name, g, w in zip(names, got, want)
        if g != w
    ]
    if failures:
        raise VerificationError(f"eta moment identities fail at n={n}, alpha={alpha}", failures)
    deviation = max(abs(float(g - w)) for g, w in zip(got, want))
    return BoundReport(
        "eta_moments",
        deviation,
        0.0,
        PASS,
        {
            "n": n,
            "alpha": format_scalar(alpha),
            "E_eta": format_scalar(got[0]),
            "E_eta2": format_scalar(got[1]),
            "E_eta4": format_scalar(got[2]),
            "E_eta_star2": format_scalar(law.zero_biased_second_moment()),
        },
    )


def coherent_law(n: int, alpha) -> dict[Partition, Fraction]:
    """Law of the n-th partition of the growth chain, by pushing the kernel forward."""
    alpha = exact_alpha(alpha)
    law = {Partition(()): Fraction(1)}
    for _ in range(n):
        nxt: dict[Partition, Fraction] = {}
        for nu, p_nu in law.items():
            for _, lam, p in step_kernel(nu, alpha).targets:
                nxt[lam] = nxt.get(lam, Fraction(0)) + p_nu * p
        law = nxt
    return law


def content_sum(lam: Partition, alpha):
    return char_statistic(lam, alpha)
