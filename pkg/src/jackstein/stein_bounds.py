"""Kolmogorov distances to the standard normal and the analytic bound evaluators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import erfcx, ndtr

from .errors import DomainError
from .jack_measure import jack_distribution
from .kerov_growth import eta_law
from .partitions import check_alpha, exact_alpha
from .reports import BoundReport, judge, report_only, require
from .zero_bias import AtomicDistribution, ZeroBiasedDistribution, zero_bias_transform

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
LOG_CLAMP = 700.0
TAIL_ENVELOPE = 0.55
KS_CHUNK = 1 << 20


def normal_cdf(x):
    """Φ(x) via erfc, accurate in both tails; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    return ndtr(np.asarray(x, dtype=float))


def normal_sf(x):
    """1 − Φ(x) without cancellation."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / math.sqrt(2.0))
    return ndtr(-np.asarray(x, dtype=float))


@dataclass(frozen=True)
class KSResult:
    distance: float
    witness_x: float
    method: str
    dkw_margin: float | None = None

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "witness_x": self.witness_x,
            "method": self.method,
            "dkw_margin": self.dkw_margin,
        }


def ks_exact_discrete(law: AtomicDistribution) -> KSResult:
    best, witness = -1.0, 0.0
    below = Fraction(0) if law.exact or all(isinstance(m, Fraction) for m in law.masses) else 0.0
    for a, m in law:
        phi = normal_cdf(float(a))
        at = below + m
        d = max(abs(float(at) - phi), abs(float(below) - phi))
        if d > best:
            best, witness = d, float(a)
        below = at
    return KSResult(best, witness, "exact-discrete")


def _critical_points(level: float, lo: float, hi: float) -> list[float]:
    s = level * SQRT_2PI
    if not 0 < s <= 1:
        return []
    r = math.sqrt(-2.0 * math.log(s))
    return [x for x in (-r, r) if lo < x < hi]


def ks_zero_biased(z: ZeroBiasedDistribution) -> KSResult:
    """Exact sup |F − Φ| for a piecewise-uniform law: endpoints and φ = level crossings."""
    best, witness = -1.0, 0.0
    cum = 0.0
    for lo, hi, g in z.pieces():
        lo_f, hi_f, g_f = float(lo), float(hi), float(g)
        for x in [lo_f, hi_f] + _critical_points(g_f, lo_f, hi_f):
            d = abs(cum + g_f * (x - lo_f) - normal_cdf(x))
            if d > best:
                best, witness = d, x
        cum += g_f * (hi_f - lo_f)
    return KSResult(best, witness, "exact-piecewise")


def dkw_margin(num: int, delta: float) -> float:
    return math.sqrt(math.log(2.0 / delta) / (2.0 * num))


@dataclass
class EmpiricalKS:
    """Running sup over consecutive chunks of one sorted sample; `seen` is the chunk end offset."""

    num: int
    distance: float = -1.0
    witness_x: float = 0.0
    seen: int = 0

    def update(self, chunk: np.ndarray) -> None:
        if chunk.size == 0:
            return
        i = np.arange(self.seen + 1, self.seen + chunk.size + 1, dtype=float)
        phi = ndtr(chunk)
        dev = np.maximum(i / self.num - phi, phi - (i - 1) / self.num)
        j = int(np.argmax(dev))
        if dev[j] > self.distance:
            self.distance, self.witness_x = float(dev[j]), float(chunk[j])
        self.seen += chunk.size

    def merge(self, other: "EmpiricalKS") -> "EmpiricalKS":
        best = self if self.distance >= other.distance else other
        return EmpiricalKS(self.num, best.distance, best.witness_x, max(self.seen, other.seen))


def ks_empirical(sample, delta: float = 1e-3, presorted: bool = False) -> KSResult:
    w = np.asarray(sample, dtype=float)
    num = w.size
    if num < 1000:
        raise DomainError(f"empirical KS needs at least 1000 samples, got {num}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not presorted:
        w = np.sort(w)
    acc = EmpiricalKS(num)
    for start in range(0, num, KS_CHUNK):
        acc.update(w[start:start + KS_CHUNK])
    return KSResult(acc.distance, acc.witness_x, "empirical", dkw_margin(num, delta))


def _mills_scaled(t):
    """√(2π)·e^{t²/2}·(1 − Φ(t)), stable for large |t|."""
    return math.sqrt(math.pi / 2.0) * erfcx(np.asarray(t, dtype=float) / math.sqrt(2.0))


def gx_eval(w, x):
    """g_x(w) = (w f_x(w))' for the Stein solution f_x; vectorized over ``w``."""
    w_arr = np.asarray(w, dtype=float)
    upper = ((1.0 + w_arr**2) * _mills_scaled(w_arr) - w_arr) * normal_cdf(float(x))
    lower = ((1.0 + w_arr**2) * _mills_scaled(-w_arr) + w_arr) * normal_sf(float(x))
    out = np.where(w_arr >= x, upper, lower)
    return float(out) if np.ndim(w) == 0 else out


def _check_n(n: int) -> None:
    if n < 3:
        raise DomainError(f"bounds need n >= 3, got {n}")


def theorem_rate(n: int, alpha) -> float:
    """max{1/√n, max(√α, 1/√α)·log n / n}."""
    a = float(alpha)
    return max(1.0 / math.sqrt(n), max(math.sqrt(a), 1.0 / math.sqrt(a)) * math.log(n) / n)


def uniform_bound_rhs(n: int, alpha, lhs: float | None = None) -> list[BoundReport]:
    """Uniform Kolmogorov bounds for W; with ``lhs`` given each becomes a verdict."""
    _check_n(n)
    a = float(check_alpha(alpha))

    def make(name, rhs, **ctx):
        if lhs is None:
            return report_only(name, rhs=rhs, n=n, alpha=a, **ctx)
        return judge(name, lhs, rhs, n=n, alpha=a, **ctx)

    out = [make("uniform_8.2", 8.2 * theorem_rate(n, a))]
    if a > n:
        delta = (math.log(a) - math.log(n)) / math.log(n)
        root = math.sqrt(a) / n
        out.append(make("large_alpha_delta", (4.7 + 3.1 / delta) * root, delta=delta))
        log_rhs = (4.7 * math.log(a) - 1.6 * math.log(n)) / (math.log(a) - math.log(n)) * root
        out.append(report_only("large_alpha_log", lhs, log_rhs, n=n, alpha=a, delta=delta))
    return out


def _profile_scale(p: float) -> float:
    return (p * p / math.log(p)) ** p


def nonuniform_bound_profile(
    n: int, alpha, p: float, x_grid: Sequence[float], branch: str = "auto"
) -> BoundReport:
    """Implied constants of the non-uniform bound over ``x_grid`` (report-only).

    ``branch`` is ``"nonuniform"`` (needs 1/n² < α < n²), ``"moment"`` (α ≥ n²)
    or ``"auto"``.  The moment branch reports E|W|^p / ((p²/log p)^p (√α/n)^{p−2}).
    """
    _check_n(n)
    alpha = exact_alpha(alpha)
    if not p >= 2:
        raise DomainError(f"need p >= 2, got {p}")
    xs = [float(x) for x in x_grid]
    if not xs or not all(math.isfinite(x) for x in xs):
        raise DomainError("x_grid must be a non-empty list of finite values")
    inside = Fraction(1, n * n) < alpha < n * n
    if branch == "auto":
        branch = "nonuniform" if inside else "moment"
    if branch == "nonuniform" and not inside:
        raise DomainError(f"the non-uniform branch needs 1/n^2 < alpha < n^2, got alpha={alpha}")
    if branch == "moment" and alpha < n * n:
        raise DomainError(f"the moment branch needs alpha >= n^2, got alpha={alpha}")
    if branch not in ("nonuniform", "moment"):
        raise DomainError(f"unknown branch {branch!r}")
    law = jack_distribution(n, alpha).w_law()
    a = float(alpha)
    if branch == "moment":
        ew = law.abs_moment(p)
        scale = _profile_scale(p) * (math.sqrt(a) / n) ** (p - 2)
        return report_only("moment_profile", float(ew) / scale, None, n=n, alpha=a, p=p,
                           abs_moment=float(ew), branch=branch)
    denom = _profile_scale(p) * theorem_rate(n, a)
    profile = []
    for x in xs:
        dev = abs(float(law.cdf(x)) - normal_cdf(x))
        profile.append(dev * (1.0 + abs(x) ** p) / denom)
    return report_only("nonuniform_profile", max(profile), None, n=n, alpha=a, p=p,
                       x_grid=xs, profile=profile, branch=branch)


def coupling_bound_rhs(
    et2: float,
    eps: float,
    tail: float,
    p: float | None = None,
    et_2p2: float | None = None,
) -> list[BoundReport]:
    """Right-hand sides of the coupling bounds, as report-only entries."""
    if et2 < 0 or eps <= 0 or not 0 <= tail <= 1:
        raise DomainError("need ET^2 >= 0, eps > 0 and tail in [0, 1]")
    base = (1.0 + SQRT_2PI / 4.0) * math.sqrt(et2)
    out = [
        report_only("coupling_uniform", rhs=base, et2=et2),
        report_only("coupling_uniform_eps", rhs=base + eps * INV_SQRT_2PI + tail,
                    et2=et2, eps=eps, tail=tail),
    ]
    if p is not None and et_2p2 is not None:
        bracket = math.sqrt(et2) + math.sqrt(et_2p2)
        out.append(report_only("coupling_nonuniform_bracket", rhs=bracket, p=p))
        out.append(report_only("coupling_nonuniform_eps_bracket",
                               rhs=bracket + eps + math.sqrt(tail), p=p, eps=eps, tail=tail))
    return out


def _clamped_exp(v: float) -> float:
    return math.exp(min(v, LOG_CLAMP))


def light_tail_bounds(n: int, alpha, q: float) -> tuple[float, float]:
    """(bound on P(|η| > t), bound on P(|η*| > t)) at t = e√(2q)/√(n−1)."""
    a = float(alpha)
    if not q > 1:
        raise DomainError(f"need q > 1, got {q}")
    expo = math.e * math.sqrt(q * n / a)
    log_qpow = expo * math.log(q)
    eta = _clamped_exp(math.log(a) - math.log(math.pi * (q - 1)) - log_qpow)
    num = a * a * q * (expo * (q - 1) + q + 1)
    star = _clamped_exp(math.log(num) - math.log(math.pi * (n - 1) * (q - 1) ** 3) - log_qpow)
    return eta, star


def eta_star_second_moment_bound(n: int, alpha) -> float:
    a = float(alpha)
    return (4.0 + 2.0 * a / (n - 1)) / (3.0 * n)


def _zb_tail(z: ZeroBiasedDistribution, t: float) -> float:
    """P(|Z| > t) for a piecewise-uniform law."""
    return 1.0 - (float(z.cdf(t)) - float(z.cdf(-t)))


def jack_tail_report(n: int, alpha, q: float, exact: bool = True) -> list[BoundReport]:
    """Light-tail bounds for η and η*, plus the √ET² surrogate."""
    _check_n(n)
    alpha = check_alpha(alpha)
    if alpha < 1:
        raise DomainError(f"the light-tail bounds need alpha >= 1, got {alpha}")
    b_eta, b_star = light_tail_bounds(n, alpha, q)
    a = float(alpha)
    ctx = dict(n=n, alpha=a, q=q)
    thr = math.e * math.sqrt(2.0 * q) / math.sqrt(n - 1)
    if not exact:
        return [
            report_only("light_tail_combined", rhs=b_eta + b_star, threshold=2 * thr, **ctx),
            report_only("light_tail_eta", rhs=b_eta, threshold=thr, **ctx),
            report_only("light_tail_eta_star", rhs=b_star, threshold=thr, **ctx),
        ]
    law = eta_law(n, exact_alpha(alpha))
    # |η| > thr  ⇔  content² > thr²·α·C(n,2) = e²·q·α·n
    cut = math.e * math.sqrt(q * a * n)
    p_eta = math.fsum(float(m) for c, m in law.contents if abs(float(c)) > cut)
    p_star = max(0.0, _zb_tail(zero_bias_transform(law.contents), cut))
    e2 = law.even_moment(2)
    es2 = law.zero_biased_second_moment()
    surrogate = math.sqrt(es2) + math.sqrt(e2)
    surrogate_bound = math.sqrt(eta_star_second_moment_bound(n, a)) + math.sqrt(2.0 / n)
    return [
        judge("light_tail_combined", p_eta + p_star, b_eta + b_star, threshold=2 * thr, **ctx),
        judge("light_tail_eta", p_eta, b_eta, threshold=thr, **ctx),
        judge("light_tail_eta_star", p_star, b_star, threshold=thr, **ctx),
        judge("sqrt_et2_surrogate", surrogate, surrogate_bound, **ctx),
    ]


def uniform_bound_check(n: int, alpha) -> list[BoundReport]:
    """Exact KS of W against the uniform bounds, for enumerable n."""
    ks = ks_exact_discrete(jack_distribution(n, alpha).w_law())
    return uniform_bound_rhs(n, alpha, lhs=ks.distance)


def _require_nonnegative(xs, strict: bool = False) -> None:
    bad = [x for x in xs if x < 0 or (strict and x == 0)]
    if bad:
        raise DomainError(f"inequality is stated for x {'>' if strict else '>='} 0, got {bad[0]}")


def mills_check(xs: Sequence[float]) -> BoundReport:
    _require_nonnegative(xs, strict=True)
    worst = max(SQRT_2PI * normal_sf(x) - math.exp(-x * x / 2.0) / x for x in xs)
    return judge("mills", worst, 0.0, slack=0.0, points=len(xs))


def tail_envelope_check(xs: Sequence[float]) -> BoundReport:
    _require_nonnegative(xs)
    x = np.asarray(xs, dtype=float)
    sup = float(np.max(np.abs(1.0 / (1.0 + x * x) - normal_sf(x))))
    return judge("tail_envelope", sup, TAIL_ENVELOPE, slack=0.0, points=len(xs))


def gx_property_check(x_values: Sequence[float], w_grid: np.ndarray) -> list[BoundReport]:
    """Sign, tail, monotonicity and growth properties of g_x on a grid, for x >= 0.

    The tail bound on w <= 0 genuinely fails for negative x (g_{-3}(-3) > 3).
    """
    _require_nonnegative(x_values)
    out = []
    for x in x_values:
        g = gx_eval(w_grid, x)
        neg = w_grid <= 0
        mono = (w_grid >= 0) & (w_grid < x)
        gm = g[mono]
        ctx = dict(x=x)
        out.append(judge("gx_nonnegative", -float(g.min()), 0.0, slack=0.0, **ctx))
        out.append(judge("gx_tail", float(g[neg].max()), 2.0 * normal_sf(x), **ctx))
        out.append(judge("gx_monotone", float(np.max(gm[:-1] - gm[1:], initial=-np.inf)), 0.0,
                         slack=0.0, **ctx))
        out.append(judge("gx_growth", float(np.max(np.abs(g) - (1.0 + np.abs(w_grid)))), 0.0,
                         slack=0.0, **ctx))
    return out


def coupling_battery_check(
    laws: Sequence[AtomicDistribution],
    rng: np.random.Generator | None = None,
    num_draws: int = 10**6,
    delta: float = 1e-3,
) -> list[BoundReport]:
    """Uniform coupling bounds for W = Σ X_i rescaled to unit variance.

    W is compared exactly with the ε-version of the bound, ε being the widest
    support diameter so that P(|T| > ε) = 0.  W* is compared with the plain
    bound: exactly for one summand, and for several summands through
    ``num_draws`` coupling draws with the DKW margin subtracted.
    """
    from .zero_bias import coupling_t_moments, sample_sum_coupling, sum_law

    laws = list(laws)
    var = float(sum(d.variance() for d in laws))
    scale = 1.0 / math.sqrt(var)
    et2 = float(coupling_t_moments(laws, 2)) / var
    eps = max(float(d.atoms[-1] - d.atoms[0]) for d in laws) * scale
    rhs_plain, rhs_eps = (r.rhs for r in coupling_bound_rhs(et2, eps, 0.0))
    w_law = sum_law(laws)
    w_float = AtomicDistribution(tuple(float(a) * scale for a in w_law.atoms), w_law.masses)
    ks_w = ks_exact_discrete(w_float)
    out = [judge("coupling_uniform_eps", ks_w.distance, rhs_eps, m=len(laws), et2=et2, eps=eps)]
    if len(laws) == 1:
        ks_star = ks_zero_biased(zero_bias_transform(w_float))
        out.append(judge("coupling_uniform", ks_star.distance, rhs_plain, m=1, et2=et2,
                         method=ks_star.method))
    elif rng is not None:
        _, w_star, _, _ = sample_sum_coupling(laws, rng, num_draws)
        ks_star = ks_empirical(w_star * scale, delta)
        out.append(judge("coupling_uniform", ks_star.distance - ks_star.dkw_margin, rhs_plain,
                         m=len(laws), et2=et2, method=ks_star.method,
                         distance=ks_star.distance, dkw_margin=ks_star.dkw_margin))
    return out


__all__ = [
    "KSResult",
    "EmpiricalKS",
    "normal_cdf",
    "normal_sf",
    "ks_exact_discrete",
    "ks_zero_biased",
    "ks_empirical",
    "dkw_margin",
    "gx_eval",
    "uniform_bound_rhs",
    "uniform_bound_check",
    "nonuniform_bound_profile",
    "coupling_bound_rhs",
    "jack_tail_report",
    "light_tail_bounds",
    "mills_check",
    "tail_envelope_check",
    "gx_property_check",
    "coupling_battery_check",
    "require",
]
