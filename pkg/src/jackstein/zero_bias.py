"""Finite atomic laws, their zero-bias transforms, and Rosenthal-type checks.

A mean-zero law with atoms x_1 < ... < x_m and masses m_j has a zero-biased
version W* with density g(x) = E[W 1(W > x)] / σ², constant on each
[x_k, x_{k+1}).  All moments of W* are closed-form piecewise integrals, so
everything stays exact when the input atoms and masses are rationals.
"""
from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .reports import BoundReport, judge, require

MERGE_TOL = 1e-12
MAX_SUPPORT = 10**6
MAX_ZB_MOMENT = 16
LOG8_CUBED_OVER_196 = math.log(8.0) ** 3 / 196.0


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _normalize(v):
    if isinstance(v, int) and not isinstance(v, bool):
        return Fraction(v)
    if isinstance(v, (Fraction, float)):
        return v
    return float(v)


@dataclass(frozen=True)
class AtomicDistribution:
    atoms: tuple
    masses: tuple

    def __post_init__(self):
        atoms = tuple(_normalize(a) for a in self.atoms)
        masses = tuple(_normalize(m) for m in self.masses)
        if not atoms or len(atoms) != len(masses):
            raise DomainError("atoms and masses must be non-empty and equally long")
        if any(b <= a for a, b in zip(atoms, atoms[1:])):
            raise DomainError("atoms must be strictly increasing")
        if any(not m > 0 for m in masses):
            raise DomainError("masses must be positive")
        total = sum(masses)
        if all(_is_exact(m) for m in masses):
            if total != 1:
                raise DomainError(f"masses sum to {total}, not 1")
        elif abs(float(total) - 1.0) > MERGE_TOL:
            raise DomainError(f"masses sum to {float(total)!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_pairs(cls, pairs: Iterable, tol: float = MERGE_TOL) -> "AtomicDistribution":
        """Build from ``(atom, mass)`` pairs, merging equal atoms (float atoms within ``tol``)."""
        acc = defaultdict(lambda: Fraction(0))
        for a, m in pairs:
            acc[_normalize(a)] += m
        items = sorted(acc.items())
        merged: list[list] = []
        for a, m in items:
            if merged and not _is_exact(a) and abs(a - merged[-1][0]) <= tol:
                merged[-1][1] += m
            else:
                merged.append([a, m])
        return cls(tuple(a for a, _ in merged), tuple(m for _, m in merged))

    @classmethod
    def from_json(cls, obj: dict) -> "AtomicDistribution":
        from .partitions import parse_scalar

        def conv(v):
            return parse_scalar(v) if isinstance(v, str) else v

        try:
            atoms, masses = obj["atoms"], obj["masses"]
        except (KeyError, TypeError):
            raise DomainError("law JSON needs 'atoms' and 'masses' arrays") from None
        return cls.from_pairs(zip(map(conv, atoms), map(conv, masses)))

    @property
    def exact(self) -> bool:
        return all(map(_is_exact, self.atoms)) and all(map(_is_exact, self.masses))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return zip(self.atoms, self.masses)

    def moment(self, k: int):
        return sum(m * a**k for a, m in self)

    def mean(self):
        return self.moment(1)

    def variance(self):
        mu = self.mean()
        return self.moment(2) - mu * mu

    def abs_moment(self, p):
        """E|X|^p; exact for integer ``p`` on exact laws."""
        if self.exact and float(p).is_integer():
            k = int(p)
            return sum(m * abs(a) ** k for a, m in self)
        return math.fsum(float(m) * abs(float(a)) ** p for a, m in self)

    def cdf(self, x):
        i = bisect.bisect_right(self.atoms, x)
        return sum(self.masses[:i])

    def scaled(self, c) -> "AtomicDistribution":
        if c > 0:
            return AtomicDistribution(tuple(a * c for a in self.atoms), self.masses)
        raise DomainError("scale factor must be positive")

    def to_json(self) -> dict:
        def out(v):
            return str(v) if isinstance(v, Fraction) else v
        return {"atoms": [out(a) for a in self.atoms], "masses": [out(m) for m in self.masses]}


def rademacher() -> AtomicDistribution:
    return AtomicDistribution((-1, 1), (Fraction(1, 2), Fraction(1, 2)))


def centered_bernoulli(p) -> AtomicDistribution:
    p = Fraction(p)
    return AtomicDistribution((-p, 1 - p), (1 - p, p))


def convolve(a: AtomicDistribution, b: AtomicDistribution, max_support: int = MAX_SUPPORT) -> AtomicDistribution:
    if len(a) * len(b) > max_support:
        raise ResourceError(
            f"convolution needs {len(a) * len(b)} atom pairs, limit is {max_support}"
        )
    return AtomicDistribution.from_pairs((x + y, p * q) for x, p in a for y, q in b)


def sum_law(laws: Sequence[AtomicDistribution], max_support: int = MAX_SUPPORT) -> AtomicDistribution:
    if not laws:
        raise DomainError("need at least one law")
    out = laws[0]
    for law in laws[1:]:
        out = convolve(out, law, max_support)
    return out


def _antiderivative_abs_power(t, q):
    # d/dt [sign(t)|t|^{q+1}/(q+1)] = |t|^q
    if t == 0:
        return 0 * t
    mag = abs(t) ** (q + 1) / (q + 1)
    return mag if t > 0 else -mag


@dataclass(frozen=True)
class ZeroBiasedDistribution:
    breakpoints: tuple
    density_levels: tuple

    @property
    def exact(self) -> bool:
        return all(map(_is_exact, self.breakpoints)) and all(map(_is_exact, self.density_levels))

    def pieces(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.density_levels)

    def moment(self, k: int):
        return zb_moment(self, k)

    def cdf(self, x):
        return zb_cdf(self, x)

    def shifted_abs_moment(self, a, q):
        """E|W* − a|^q in closed form; exact for integer ``q`` on exact input."""
        total = 0
        for lo, hi, g in self.pieces():
            total += g * (_antiderivative_abs_power(hi - a, q) - _antiderivative_abs_power(lo - a, q))
        return total

    def sample(self, rng: np.random.Generator, size=None):
        return zb_sample(self, rng, size)

    def _cumulative(self) -> np.ndarray:
        cum = [0.0]
        for lo, hi, g in self.pieces():
            cum.append(cum[-1] + float(g) * float(hi - lo))
        return np.array(cum)


def zero_bias_transform(law: AtomicDistribution) -> ZeroBiasedDistribution:
    if len(law) < 2:
        raise DomainError("zero-bias transform of a one-atom law is degenerate")
    mu = law.mean()
    if law.exact:
        if mu != 0:
            raise DomainError(f"law must have mean zero, got {mu}")
    elif abs(float(mu)) > MERGE_TOL:
        raise DomainError(f"law must have mean zero, got {float(mu)!r}")
    var = law.moment(2) - mu * mu
    levels = []
    tail = 0 * var
    for a, m in reversed(list(law)[1:]):
        tail += a * m
        levels.append(tail / var)
    return ZeroBiasedDistribution(law.atoms, tuple(reversed(levels)))


def zb_moment(z: ZeroBiasedDistribution, k: int):
    """∫ x^k g(x) dx by exact polynomial antiderivatives."""
    if not (isinstance(k, int) and 0 <= k <= MAX_ZB_MOMENT):
        raise DomainError(f"moment order must be an integer in [0, {MAX_ZB_MOMENT}], got {k}")
    return sum(g * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1) for lo, hi, g in z.pieces())


def zb_cdf(z: ZeroBiasedDistribution, x):
    bp = z.breakpoints
    if x <= bp[0]:
        return 0 * z.density_levels[0]
    if x >= bp[-1]:
        return 1 + 0 * z.density_levels[0]
    k = bisect.bisect_right(bp, x) - 1
    below = sum(g * (hi - lo) for lo, hi, g in list(z.pieces())[:k])
    return below + z.density_levels[k] * (x - bp[k])


def zb_sample(z: ZeroBiasedDistribution, rng: np.random.Generator, size=None):
    """Inverse-CDF draws: pick a piece by mass, then a uniform point inside it."""
    cum = z._cumulative()
    cum /= cum[-1]
    u = rng.random(size)
    k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(cum) - 2)
    lo = np.asarray([float(b) for b in z.breakpoints])
    width = lo[1:] - lo[:-1]
    frac = (u - cum[k]) / (cum[k + 1] - cum[k])
    out = lo[k] + np.clip(frac, 0.0, 1.0) * width[k]
    return float(out) if size is None else out


class KappaConstant(NamedTuple):
    p: float
    log_value: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf


def kappa(p: float) -> KappaConstant:
    """κ_p = ((log 8)³/196)·(7p / (4 log p))^p, kept in log form."""
    if not p >= 2:
        raise DomainError(f"kappa needs p >= 2, got {p}")
    log_val = math.log(LOG8_CUBED_OVER_196) + p * (math.log(7.0 * p) - math.log(4.0 * math.log(p)))
    return KappaConstant(float(p), log_val)


def one_minus_theta(p: float) -> float:
    """1 − θ(p) for θ(p) = (log²(p−1) / (4(p−1)))^{1/(p−3)}."""
    base = math.log(p - 1) ** 2 / (4.0 * (p - 1))
    return -math.expm1(math.log(base) / (p - 3))


def kappa_lemma_check(p: float) -> list[BoundReport]:
    """Both κ_p growth inequalities at one p > 8, compared on the log scale."""
    if not p > 8:
        raise DomainError(f"the kappa lemmas need p > 8, got {p}")
    log_kp = kappa(p).log_value
    ratio_req = math.log(8.0) + 2.0 * (math.log(p - 1) - math.log(math.log(p - 1)))
    ratio = log_kp - kappa(p - 2).log_value
    one_m = one_minus_theta(p)
    lhs_a1 = math.log(2.0 * (p - 1)) - (p - 3) * math.log(one_m)
    return [
        judge("kappa_ratio", ratio_req, ratio, slack=0.0, p=p, scale="log",
              statement="log 8((p-1)/log(p-1))^2 <= log(kappa_p/kappa_{p-2})"),
        judge("kappa_theta", lhs_a1, log_kp, slack=0.0, p=p, scale="log", theta=1.0 - one_m,
              statement="log(2(p-1)/(1-theta)^(p-3)) <= log kappa_p"),
    ]


class SumCoupling(NamedTuple):
    w: float
    w_star: float
    t: float
    index: int


class _CouplingPlan:
    def __init__(self, laws: Sequence[AtomicDistribution]):
        if not laws:
            raise DomainError("need at least one law")
        self.atoms = [np.array([float(a) for a in d.atoms]) for d in laws]
        self.masses = [np.array([float(m) for m in d.masses]) for d in laws]
        self.transforms = [zero_bias_transform(d) for d in laws]
        var = np.array([float(d.variance()) for d in laws])
        if np.any(var <= 0):
            raise DomainError("every law needs positive variance")
        self.index_p = var / var.sum()

    def draw(self, rng: np.random.Generator, size: int):
        xs = np.empty((len(self.atoms), size))
        for i, (a, m) in enumerate(zip(self.atoms, self.masses)):
            xs[i] = rng.choice(a, size=size, p=m)
        w = xs.sum(axis=0)
        idx = rng.choice(len(self.atoms), size=size, p=self.index_p)
        x_star = np.empty(size)
        for i, z in enumerate(self.transforms):
            sel = np.flatnonzero(idx == i)
            if sel.size:
                x_star[sel] = z.sample(rng, sel.size)
        t = x_star - xs[idx, np.arange(size)]
        return w, w + t, t, idx


def sum_zero_bias_coupling(laws: Sequence[AtomicDistribution], rng: np.random.Generator) -> SumCoupling:
    """One draw of (W, W*, T) with W* = W − X_I + X_I*."""
    w, ws, t, idx = _CouplingPlan(laws).draw(rng, 1)
    return SumCoupling(float(w[0]), float(ws[0]), float(t[0]), int(idx[0]))


def sample_sum_coupling(laws: Sequence[AtomicDistribution], rng: np.random.Generator, size: int):
    """``size`` independent coupling draws as arrays ``(W, W*, T, I)``."""
    return _CouplingPlan(laws).draw(rng, size)


def coupling_t_moments(laws: Sequence[AtomicDistribution], q):
    """E|T|^q for T = X_I* − X_I, analytically: a variance-weighted mixture of shifted W*-laws."""
    if not laws:
        raise DomainError("need at least one law")
    variances = [d.variance() for d in laws]
    total = sum(variances)
    out = 0
    for d, v in zip(laws, variances):
        z = zero_bias_transform(d)
        inner = sum(m * z.shifted_abs_moment(a, q) for a, m in d)
        out += (v / total) * inner
    return out


def rosenthal_check(laws: Sequence[AtomicDistribution], p: float, strict: bool = True) -> list[BoundReport]:
    """Both Rosenthal-type inequalities for W = Σ X_i at exponent p."""
    if not p >= 2:
        raise DomainError(f"need p >= 2, got {p}")
    laws = list(laws)
    w = sum_law(laws)
    var = float(w.variance())
    sigma = math.sqrt(var)
    ew_p = float(w.abs_moment(p))
    norm_p = ew_p ** (1.0 / p)
    sum_xp = math.fsum(float(d.abs_moment(p)) for d in laws)
    rhs_22 = 3.5 * p / math.log(p) * max(sigma, sum_xp ** (1.0 / p))
    et = float(coupling_t_moments(laws, p - 2))
    log_rhs_21 = kappa(p).log_value + math.log(sigma**p + var * et)
    reports = [
        judge("rosenthal_3.5p", norm_p, rhs_22, p=p, m=len(laws), sigma=sigma,
              sum_abs_moment_p=sum_xp),
        judge("rosenthal_kappa", math.log(ew_p), log_rhs_21, p=p, m=len(laws), scale="log",
              e_abs_w_p=ew_p, e_abs_t_p_minus_2=et, method="analytic"),
    ]
    return require(reports, "rosenthal check") if strict else reports
