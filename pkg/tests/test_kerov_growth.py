import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ALPHA_GRID, alphas, partitions
from jackstein import _growth_kernel as gk
from jackstein import kerov_growth
from jackstein.errors import DomainError, VerificationError
from jackstein.jack_measure import hook_products, jack_distribution, jack_probability
from jackstein.kerov_growth import (
    coherent_law,
    eta_law,
    growth_moment_report,
    low_hook_ratio,
    psi_prime,
    sample_path,
    step_kernel,
)
from jackstein.partitions import Cell, Partition, char_statistic, corners, dimension, enumerate_partitions


def test_psi_prime_examples():
    a = Fraction(5, 7)
    assert psi_prime(Partition((1,)), Cell(1, 2), a) == 1
    assert psi_prime(Partition((1,)), Cell(2, 1), a) == 2 * a / (a + 1)
    assert psi_prime(Partition((1, 1)), Cell(3, 1), a) == 3 * a / (a + 2)
    with pytest.raises(DomainError):
        psi_prime(Partition((1, 1)), Cell(2, 2), a)


def test_step_kernel_examples():
    a = Fraction(11, 3)
    row = step_kernel(Partition((1,)), a)
    assert {str(l): p for _, l, p in row.targets} == {"[2]": 1 / (a + 1), "[1,1]": a / (a + 1)}
    row = step_kernel(Partition((2,)), a)
    assert {str(l): p for _, l, p in row.targets} == {"[3]": 1 / (2 * a + 1), "[2,1]": 2 * a / (2 * a + 1)}
    row = step_kernel(Partition((2, 1)), 1)
    assert [p for _, _, p in row.targets] == [Fraction(3, 8), Fraction(1, 4), Fraction(3, 8)]


def rectangles(n_max):
    for rows in range(1, n_max + 1):
        for cols in range(1, n_max // rows + 1):
            yield Partition((cols,) * rows)


@pytest.mark.parametrize("alpha", ALPHA_GRID + [Fraction(10), Fraction(1, 10)])
def test_unique_predecessor_forcing(alpha):
    # a rectangle has one removable corner, so the kernel is forced by the two Jack laws
    for lam in rectangles(12):
        (corner,) = corners(lam)[1]
        parts = list(lam.parts)
        parts[corner.row - 1] -= 1
        nu = Partition(tuple(p for p in parts if p))
        forced = jack_probability(lam, alpha) / jack_probability(nu, alpha)
        assert step_kernel(nu, alpha).probability(lam) == forced


@given(partitions(max_n=10), alphas)
def test_incremental_ratio_matches_full_products(nu, alpha):
    for s in corners(nu)[0]:
        full = hook_products(nu, alpha).c_low / hook_products(nu.add_cell(s), alpha).c_low
        assert low_hook_ratio(nu, s, alpha) == full


@given(partitions(max_n=10))
def test_plancherel_growth(nu):
    for s, lam, p in step_kernel(nu, 1).targets:
        assert p == Fraction(dimension(lam), (nu.n + 1) * dimension(nu))


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_row_stochastic(alpha):
    for m in range(11):
        for nu in enumerate_partitions(m):
            row = step_kernel(nu, alpha)
            assert row.total() == 1
            assert all(p > 0 for _, _, p in row.targets)
            assert [s for s, _, _ in row.targets] == corners(nu)[0]


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_coherence(alpha):
    law = {Partition(()): Fraction(1)}
    for n in range(1, 11):
        nxt = {}
        for nu, p_nu in law.items():
            for _, lam, p in step_kernel(nu, alpha).targets:
                nxt[lam] = nxt.get(lam, 0) + p_nu * p
        assert nxt == dict(jack_distribution(n, alpha).entries)
        law = nxt


def test_coherent_law_helper():
    assert coherent_law(5, Fraction(3)) == dict(jack_distribution(5, 3).entries)


def test_sample_path_single_box():
    s = sample_path(1, 2.0, np.random.default_rng(0))
    assert s.final == Partition((1,)) and s.contents == (0.0,) and s.w_value == 0.0


def test_sample_path_deterministic():
    a = sample_path(100, 2.0, np.random.default_rng(123))
    b = sample_path(100, 2.0, np.random.default_rng(123))
    assert a == b and a.final.n == 100


@given(st.integers(1, 400), st.sampled_from([0.1, 0.5, 1.0, 5 / 3, 7.0, 100.0]), st.integers(0, 2**32))
def test_float_path_content_sum(n, alpha, seed):
    s = sample_path(n, alpha, np.random.default_rng(seed))
    total = float(char_statistic(s.final, Fraction(alpha)))
    assert s.final.n == n
    assert abs(sum(s.contents) - total) <= 1e-9 * max(1.0, abs(total))
    if n > 1:
        assert s.w_value == pytest.approx(total / math.sqrt(alpha * n * (n - 1) / 2), rel=1e-9)


@given(st.integers(1, 25), alphas, st.integers(0, 2**32))
def test_exact_path_content_sum(n, alpha, seed):
    s = sample_path(n, alpha, np.random.default_rng(seed), exact=True)
    assert sum(s.contents) == char_statistic(s.final, alpha)


def test_two_box_frequency():
    rng = np.random.default_rng(7)
    num = 100_000
    hits = sum(sample_path(2, 1.0, rng).final == Partition((2,)) for _ in range(num))
    assert abs(hits / num - 0.5) <= 4.5 * 0.5 / math.sqrt(num)


@pytest.mark.parametrize("n, alpha", [(2000, 1.0), (2000, 0.1), (2000, 10.0), (700, 5 / 3), (3000, 100.0)])
def test_compiled_residues_match_exact_kernel(n, alpha):
    # the compiled recursion and the hook-product kernel are independent routes
    u = np.random.default_rng(n).random(n)
    rr, cc, nx, pv, xs, ys, ps = gk.work_arrays(n)
    _, _, k, head = gk.grow(n, alpha, u, rr, cc, nx, pv, xs, ys, ps, np.empty(1), False)
    rows, cols, prob = gk.corner_table(k, head, rr, cc, nx, ps)
    lam = Partition(gk.final_parts(rows, cols))
    assert lam.n == n
    exact = step_kernel(lam, alpha)
    assert [(s.row, s.col) for s, _, _ in exact.targets] == list(zip(rows.tolist(), cols.tolist()))
    ref = np.array([p for _, _, p in exact.targets])
    assert np.max(np.abs(prob / prob.sum() - ref) / ref) < 1e-10


def test_eta_law_two_boxes():
    a = Fraction(7, 5)
    law = eta_law(2, a)
    assert dict(law.contents) == {-1: a / (a + 1), a: 1 / (a + 1)}
    assert law.contents.mean() == 0
    law2 = eta_law(2, 2)
    etas = dict(law2.eta_atoms())
    assert etas == pytest.approx({2 / math.sqrt(2): Fraction(1, 3), -1 / math.sqrt(2): Fraction(2, 3)})
    with pytest.raises(DomainError):
        eta_law(1, 1)


def test_growth_moment_examples():
    r = growth_moment_report(4, 1)
    assert r.verdict == "pass"
    assert r.context["E_eta2"] == "1/2" and r.context["E_eta4"] == "5/12"
    assert r.context["E_eta_star2"] == "5/18"
    assert growth_moment_report(2, Fraction(13, 3)).context["E_eta2"] == "1"
    assert growth_moment_report(6, 2).context["E_eta4"] == "19/90"


def test_corrupted_kernel_is_caught(monkeypatch):
    original = kerov_growth.psi_prime

    def skewed(nu, corner, alpha):
        return original(nu, corner, alpha) * (Fraction(11, 10) if corner.row == 1 else 1)

    monkeypatch.setattr(kerov_growth, "psi_prime", skewed)
    with pytest.raises(VerificationError):
        growth_moment_report(5, 2)
