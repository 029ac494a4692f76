import math

import numpy as np
import pytest
from scipy import stats

from marksurv.index import GammaIndex, HarmonicIndex
from marksurv.random_measure import (MeasureRealization, ResourceError,
                                     compare_constructions,
                                     gamma_interval_totals, joint_survival,
                                     realization_to_csv, sample_gamma_measure,
                                     sample_survival_times)


def make_rng(seed):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# gamma measure sampler


def test_interval_total_is_gamma_distributed():
    rng = make_rng(30)
    tot = gamma_interval_totals(1.0, 1.0, [0.0, 1.0], 1e-8, 10000, rng)[:, 0]
    p = stats.kstest(tot, "gamma", args=(1.0, 0.0, 1.0)).pvalue
    assert p > 0.01
    tot2 = gamma_interval_totals(2.0, 3.0, [0.0, 0.5], 1e-8, 10000, rng)[:, 0]
    p2 = stats.kstest(tot2, "gamma", args=(1.0, 0.0, 1.0 / 3.0)).pvalue
    assert p2 > 0.01


def test_disjoint_intervals_independent():
    rng = make_rng(31)
    tot = gamma_interval_totals(1.0, 1.0, [0.0, 1.0, 2.0], 1e-8, 10000, rng)
    r = np.corrcoef(tot[:, 0], tot[:, 1])[0, 1]
    assert abs(r) * math.sqrt(tot.shape[0]) < 3.0


def test_zero_intensity_gives_empty_measure():
    rng = make_rng(32)
    m = sample_gamma_measure(0.0, 1.0, 5.0, 1e-6, rng)
    assert m.n_atoms == 0
    assert m.total() == 0.0


def test_expected_total_mass_near_untruncated_mean():
    rng = make_rng(33)
    nu, rho = 1.0, 1.0
    tot = gamma_interval_totals(nu, rho, [0.0, 1.0], 1e-6, 1000, rng)[:, 0]
    se = tot.std(ddof=1) / math.sqrt(tot.size)
    assert abs(tot.mean() - nu / rho) < max(3.0 * se, 0.02 * nu / rho)


def test_truncation_guard():
    rng = make_rng(34)
    with pytest.raises(ResourceError):
        sample_gamma_measure(1.0, 1.0, 1e6, 1e-300, rng)


def test_laplace_exponent_identity():
    rng = make_rng(35)
    nu, rho = 1.0, 1.0
    tot = gamma_interval_totals(nu, rho, [0.0, 1.0], 1e-8, 100000, rng)[:, 0]
    for t in (1.0, 2.0, 5.0):
        emp = -math.log(np.exp(-t * tot).mean())
        exact = nu * math.log1p(t / rho)
        assert abs(emp / exact - 1.0) < 0.02


def test_atom_contribution_rate_limit():
    # the expected contribution of a shrinking interval to the joint density
    # approaches the block rate linearly in the interval width
    nu, rho = 1.0, 1.0
    ix = GammaIndex(nu, rho)
    r, d = 2, 3
    target = nu * ix.unit_block_rate(r, d)

    def contribution(dt):
        val = sum((-1.0) ** j * math.comb(d, j)
                  * math.exp(-nu * dt * math.log1p((r + j) / rho))
                  for j in range(d + 1))
        return val / dt

    errs = [abs(contribution(dt) - target) for dt in (1e-2, 1e-3, 1e-4)]
    assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.25)
    assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.25)


# ---------------------------------------------------------------------------
# conditional lifetimes


def test_drift_only_lifetimes_exponential():
    rng = make_rng(36)
    m = MeasureRealization(t_max=100.0, drift=0.7,
                           locations=np.array([]), masses=np.array([]),
                           truncation=1e-9)
    t = sample_survival_times(20000, m, rng)
    t = t[np.isfinite(t)]
    assert stats.kstest(t, "expon", args=(0.0, 1.0 / 0.7)).pvalue > 0.01


def test_two_atom_measure_enumeration():
    rng = make_rng(37)
    x1, z1 = 1.0, 0.6
    x2, z2 = 2.0, 1.1
    m = MeasureRealization(t_max=3.0, drift=0.0,
                           locations=np.array([x1, x2]),
                           masses=np.array([z1, z2]), truncation=1e-9)
    reps = 100000
    t = sample_survival_times(reps, m, rng)
    p1 = -math.expm1(-z1)
    p2 = math.exp(-z1) * -math.expm1(-z2)
    for value, prob in ((x1, p1), (x2, p2)):
        hat = (t == value).mean()
        se = math.sqrt(prob * (1.0 - prob) / reps)
        assert abs(hat - prob) < 3.0 * se
    hat_inf = np.isinf(t).mean()
    p_inf = math.exp(-z1 - z2)
    assert abs(hat_inf - p_inf) < 3.0 * math.sqrt(p_inf * (1 - p_inf) / reps)


def test_empty_draw():
    rng = make_rng(38)
    m = MeasureRealization(t_max=1.0, drift=0.5, locations=np.array([]),
                           masses=np.array([]), truncation=1e-9)
    assert sample_survival_times(0, m, rng).size == 0


def test_drift_plus_atoms_survival_function():
    rng = make_rng(39)
    m = MeasureRealization(t_max=10.0, drift=0.4,
                           locations=np.array([0.5, 2.0]),
                           masses=np.array([0.8, 0.5]), truncation=1e-9)
    reps = 200000
    t = sample_survival_times(reps, m, rng)
    for q in (0.25, 0.5, 1.0, 3.0, 6.0):
        h = 0.4 * q + 0.8 * (q >= 0.5) + 0.5 * (q >= 2.0)
        expect = math.exp(-h)
        hat = (t > q).mean()
        se = math.sqrt(expect * (1 - expect) / reps)
        assert abs(hat - expect) < 4.0 * se


# ---------------------------------------------------------------------------
# exact joint survival


def test_joint_survival_examples():
    g = GammaIndex(1.0, 1.0)
    assert joint_survival([0.0, 0.0], g) == 1.0
    assert joint_survival([2.0], g) == pytest.approx(
        math.exp(-g.total_rate(1) * 2.0), rel=1e-14)
    assert joint_survival([1.0, 2.0], g) == pytest.approx(1.0 / 6.0,
                                                          rel=1e-12)


def test_joint_survival_exchangeable():
    h = HarmonicIndex(1.0, 2.0)
    assert joint_survival([0.3, 1.2, 0.7], h) == pytest.approx(
        joint_survival([1.2, 0.7, 0.3], h), rel=1e-14)


# ---------------------------------------------------------------------------
# equivalence of the two constructions


def test_constructions_agree_moderate_scale():
    rng = make_rng(40)
    rep = compare_constructions(1.0, 1.0, 3, [0.5, 1.0, 2.0],
                                reps=20000, eps=1e-7, rng=rng)
    assert rep.max_abs_z < 4.0


def test_truncation_insensitivity():
    rng = make_rng(41)
    a = compare_constructions(1.0, 1.0, 2, [0.5, 1.5], reps=20000,
                              eps=2e-7, rng=rng)
    b = compare_constructions(1.0, 1.0, 2, [0.5, 1.5], reps=20000,
                              eps=1e-7, rng=rng)
    se = np.sqrt(a.survival_exact * (1.0 - a.survival_exact) / a.reps)
    assert np.all(np.abs(a.survival_emp - b.survival_emp) < 2.0 * se)


def test_single_particle_equivalence():
    rng = make_rng(42)
    rep = compare_constructions(1.0, 1.0, 1, [0.5, 1.0, 2.0],
                                reps=20000, eps=1e-7, rng=rng)
    assert rep.max_abs_z < 4.0


def test_realization_csv():
    m = MeasureRealization(t_max=2.0, drift=0.0,
                           locations=np.array([0.5, 1.5]),
                           masses=np.array([0.25, 1.0]), truncation=1e-6)
    text = realization_to_csv(m)
    lines = text.strip().splitlines()
    assert lines[0] == "location,mass"
    assert len(lines) == 3
    assert float(lines[1].split(",")[1]) == 0.25
