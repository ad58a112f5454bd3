"""Release acceptance: one test (or one pair) per criterion, each with its time budget."""
import json
import math
import os
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import record_criterion
from jackstein.jack_measure import jack_distribution, jack_probability, row_tail
from jackstein.kerov_growth import coherent_law, eta_law, expected_eta_moments, step_kernel
from jackstein.mc_engine import McConfig, run_mc
from jackstein.partitions import Partition, enumerate_partitions, w_normalizer_sq
from jackstein.stein_bounds import (
    tail_envelope_check,
    coupling_battery_check,
    gx_property_check,
    jack_tail_report,
    ks_exact_discrete,
    mills_check,
    nonuniform_bound_profile,
    uniform_bound_rhs,
)
from jackstein.suites import identity_battery, zero_bias_identities
from jackstein.zero_bias import (
    AtomicDistribution,
    centered_bernoulli,
    coupling_t_moments,
    kappa_lemma_check,
    rademacher,
    rosenthal_check,
)

F = Fraction
GRID = [F(1), F(2), F(1, 2), F(5, 3)]
REGRESSION = Path(__file__).parent / "regression" / "nonuniform_profiles.json"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def finish(number: int, failures: list, timer: Timer, budget: float, what: str) -> None:
    ok = not failures and timer.elapsed < budget
    detail = f"{what}; {timer.elapsed:.2f}s of {budget:g}s"
    if failures:
        detail += f"; {len(failures)} failures, first: {failures[0]}"
    record_criterion(number, ok, detail)
    assert not failures, failures[:5]
    assert timer.elapsed < budget


def test_criterion_01_worked_example():
    lam = Partition((3, 2, 1))
    failures = []
    with Timer() as t:
        for a in GRID:
            want = 720 * a**3 / ((3 * a + 2) * (2 * a + 3) * (a + 2) ** 2 * (2 * a + 1) ** 2)
            if jack_probability(lam, a) != want:
                failures.append(str(a))
    finish(1, failures, t, 1.0, "P([3,2,1]) closed form at 4 alphas")


def test_criterion_02_normalization():
    failures = []
    with Timer() as t:
        for a in GRID + [F(10)]:
            for n in range(13):
                if sum(p for _, p in jack_distribution(n, a)) != 1:
                    failures.append((n, a))
    finish(2, failures, t, 30.0, "total mass 1 for n<=12, 5 alphas")


def test_criterion_03_kernel_gate():
    failures = []
    with Timer() as t:
        for a in GRID:
            for m in range(11):
                for nu in enumerate_partitions(m):
                    if step_kernel(nu, a).total() != 1:
                        failures.append(("row", nu, a))
            for n in range(11):
                pushed = coherent_law(n, a)
                law = dict(jack_distribution(n, a).entries)
                if pushed != law:
                    failures.append(("coherence", n, a))
    finish(3, failures, t, 120.0, "row sums n<=11, coherence n<=10")


def test_criterion_04_moment_identities():
    failures = []
    with Timer() as t:
        for a in GRID:
            for n in range(2, 13):
                law = eta_law(n, a)
                e1, e2, e4 = expected_eta_moments(n, a)
                got = (law.contents.mean(), law.even_moment(2), law.even_moment(4))
                if got != (e1, e2, e4):
                    failures.append(("eta", n, a))
                if law.zero_biased_second_moment() != got[2] / (3 * got[1]):
                    failures.append(("eta_star", n, a))
                s_law = jack_distribution(n, a).statistic_law()
                if s_law.mean() != 0 or s_law.moment(2) / w_normalizer_sq(n, a) != 1:
                    failures.append(("W", n, a))
    finish(4, failures, t, 120.0, "eta, eta*, W moments for n in 2..12")


def test_criterion_05_uniform_bound_exact():
    failures = []
    anchor = None
    with Timer() as t:
        for a in GRID + [F(10), F(1, 10)]:
            for n in range(3, 13):
                ks = ks_exact_discrete(jack_distribution(n, a).w_law()).distance
                rep = uniform_bound_rhs(n, a, lhs=ks)[0]
                if not rep.passed:
                    failures.append((n, a, ks, rep.rhs))
                if (n, a) == (3, 1):
                    anchor = (ks, rep.rhs)
    assert anchor[0] == pytest.approx(1 / 3, rel=1e-14)
    assert anchor[1] == pytest.approx(4.7342722073549309, rel=1e-14)
    finish(5, failures, t, 120.0, f"60 cases; anchor KS={anchor[0]:.6f} vs {anchor[1]:.4f}")


MC_CASES = [(1000, 1.0), (10**4, 1.0), (1000, 10.0), (10**4, 100.0), (1000, 0.1)]


@pytest.fixture(scope="module")
def mc_runs():
    workers = os.cpu_count() or 1
    out = []
    t0 = time.perf_counter()
    for n, a in MC_CASES:
        out.append(run_mc(McConfig(n, a, 10**6, seed=2024, workers=workers)))
    return out, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_06_statistics(mc_runs):
    runs, _ = mc_runs
    failures = []
    rows = []
    for rep in runs:
        bound = rep.bounds[0]
        rows.append(f"n={rep.config.n} a={rep.config.alpha:g}: {bound.lhs:.5f}<={bound.rhs:.4f}")
        if not bound.passed:
            failures.append(rows[-1])
    ok = not failures
    record_criterion(6, ok, "KS - dkw vs RHS: " + ", ".join(rows))
    assert ok, failures
    assert runs[1].bounds[0].rhs == pytest.approx(0.082, rel=1e-12)
    assert runs[1].ks.dkw_margin == pytest.approx(0.0019494746035204052, rel=1e-12)


@pytest.mark.slow
@pytest.mark.xfail(
    (os.cpu_count() or 1) < 4,
    reason="5e6 growth paths at n up to 1e4 need about 55 CPU-minutes; the 15-minute budget needs 4+ cores",
    strict=False,
)
def test_criterion_06_runtime(mc_runs):
    _, elapsed = mc_runs
    ok = elapsed < 900.0
    record_criterion(6, ok, f"runtime {elapsed:.0f}s of 900s on {os.cpu_count()} cores")
    assert ok


def test_criterion_07_large_alpha():
    failures = []
    reported = 0
    with Timer() as t:
        for n in range(3, 13):
            for a in (F(n * n), F(100), F(1000)):
                if a <= n:
                    continue
                ks = ks_exact_discrete(jack_distribution(n, a).w_law()).distance
                reps = {r.name: r for r in uniform_bound_rhs(n, a, lhs=ks)}
                delta = reps["large_alpha_delta"]
                if not delta.passed:
                    failures.append((n, a, ks, delta.rhs))
                log_rhs = reps["large_alpha_log"]
                assert log_rhs.verdict == "report-only" and math.isfinite(log_rhs.rhs)
                reported += 1
        example = uniform_bound_rhs(10, 100)[1].rhs
    assert example == pytest.approx(7.8, rel=1e-14)
    finish(7, failures, t, 60.0, f"{reported} cases with alpha>n; n=10,alpha=100 RHS={example:.2f}")


def test_criterion_08_row_tails():
    failures = []
    with Timer() as t:
        for a in GRID:
            for n in range(1, 13):
                for l in range(1, n + 1):
                    rt = row_tail(n, a, l)
                    if not rt.holds():
                        failures.append((n, a, l))
    finish(8, failures, t, 60.0, "l<=n<=12")


def test_criterion_09_light_tails():
    failures = []
    with Timer() as t:
        for a in (F(1), F(2), F(10)):
            for n in range(4, 13):
                for q in (2, 4):
                    reps = {r.name: r for r in jack_tail_report(n, a, q)}
                    for name in ("light_tail_eta", "light_tail_eta_star"):
                        if not reps[name].passed:
                            failures.append((name, n, a, q, reps[name].lhs, reps[name].rhs))
    finish(9, failures, t, 60.0, "n in 4..12, alpha in {1,2,10}, q in {2,4}")


def test_criterion_10_zero_bias_identities():
    failures = []
    with Timer() as t:
        laws = identity_battery(10, GRID)
        for law in laws:
            failures.extend(r for r in zero_bias_identities(law) if not r.passed)
    assert len(laws) >= 10
    finish(10, failures, t, 60.0, f"{len(laws)} exact laws, k=1..7")


def test_criterion_11_rosenthal():
    failures = []
    checks = 0
    with Timer() as t:
        for law in (rademacher(), centered_bernoulli(F(1, 4))):
            for m in (1, 2, 4, 8, 16):
                for p in (2, 3, 4, 6, 8, 16):
                    for r in rosenthal_check([law] * m, p, strict=False):
                        checks += 1
                        if not r.passed:
                            failures.append((r.name, m, p, r.lhs, r.rhs))
        anchor = rosenthal_check([rademacher()] * 4, 4)[0]
    assert anchor.lhs == pytest.approx(2.515, abs=5e-4)
    assert anchor.rhs == pytest.approx(20.2, abs=0.05)
    finish(11, failures, t, 120.0, f"{checks} checks; anchor {anchor.lhs:.3f} vs {anchor.rhs:.1f}")


def test_criterion_12_kappa_lemmas():
    failures = []
    with Timer() as t:
        for k in range(1, 3921):
            p = 8 + k / 10
            failures.extend((p, r.name) for r in kappa_lemma_check(p) if not r.passed)
    finish(12, failures, t, 10.0, "p in (8, 400] step 0.1")


def test_criterion_13_coupling_bounds():
    failures = []
    singles = [
        rademacher(),
        centered_bernoulli(F(1, 4)),
        AtomicDistribution((-1, 1, 3), (F(5, 8), F(1, 4), F(1, 8))),
        AtomicDistribution((-1, 0, 1), (F(1, 3),) * 3),
    ] + [eta_law(n, a).contents for n in (4, 7, 10) for a in (F(1), F(5, 3))]
    with Timer() as t:
        for law in singles:
            et2 = coupling_t_moments([law], 2) / law.variance()
            reps = coupling_battery_check([law])
            assert reps[1].context["et2"] == pytest.approx(float(et2), rel=1e-14)
            failures.extend((r.name, "single") for r in reps if not r.passed)
        for i, law in enumerate((rademacher(), centered_bernoulli(F(1, 4)))):
            for m in (2, 4, 8, 16):
                reps = coupling_battery_check([law] * m, np.random.default_rng([13, i, m]), 10**6)
                failures.extend((r.name, i, m) for r in reps if not r.passed)
    finish(13, failures, t, 600.0, f"{len(singles)} single laws, 8 sums at N=1e6")


def _profiles() -> dict:
    xs = [x / 4 for x in range(-16, 17)]
    out = {}
    for p in (2, 3, 4):
        for n in range(3, 11):
            for a in GRID:
                out[f"nonuniform/p={p}/n={n}/alpha={a}"] = nonuniform_bound_profile(n, a, p, xs).lhs
            for a in (F(n * n), F(2 * n * n)):
                out[f"moment/p={p}/n={n}/alpha={a}"] = nonuniform_bound_profile(n, a, p, xs).lhs
    return out


def test_criterion_14_profiles():
    failures = []
    with Timer() as t:
        values = _profiles()
    if os.environ.get("JACKSTEIN_REGEN_PROFILES"):
        REGRESSION.write_text(json.dumps(values, indent=1, sort_keys=True) + "\n")
    stored = json.loads(REGRESSION.read_text())
    if stored.keys() != values.keys():
        failures.append("regression keys differ")
    failures.extend(k for k, v in values.items() if not math.isclose(v, stored.get(k, math.nan), rel_tol=1e-9))
    spreads = {}
    for key, v in values.items():
        branch, p = key.split("/")[:2]
        spreads.setdefault((branch, p), []).append(v)
    worst = 0.0
    for group, vs in spreads.items():
        if not all(math.isfinite(v) and v > 0 for v in vs):
            failures.append(("non-finite", group))
            continue
        worst = max(worst, max(vs) / min(vs))
    if worst >= 10:
        failures.append(("spread", worst))
    finish(14, failures, t, 120.0, f"{len(values)} profiles, max spread {worst:.2f}x per (branch, p)")


def test_criterion_15_stein_kernel():
    failures = []
    with Timer() as t:
        w = np.round(np.arange(-1000, 1001) * 0.01, 10)
        reps = gx_property_check([0.5 * k for k in range(1, 11)], w)
        reps.append(mills_check([0.1 * k for k in range(1, 101)]))
        reps.append(tail_envelope_check(np.linspace(0.0, 10.0, 100_001)))
        failures.extend(r.name for r in reps if not r.passed)
    finish(15, failures, t, 30.0, f"{len(reps)} grid checks")
