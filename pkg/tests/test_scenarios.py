import numpy as np
import pytest

from gramlab.bounds import exact_rate_constant
from gramlab.scenarios import (
    censored_gaussian,
    gaussian_iid,
    histogram_design,
    histogram_sample,
    make_scenario,
    mixture_noise,
    rho_fourth_moment,
    scaled_gaussian_rademacher,
    scenario_from_config,
    scenario_names,
    two_point_rho,
    two_radius_sphere,
)

BIG = 1_000_000


def test_determinism_bit_identical():
    for name in scenario_names():
        scen = make_scenario(name)
        a = scen.generate(50, seed=123, trial=7)
        b = scen.generate(50, seed=123, trial=7)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)
        c = scen.generate(50, seed=123, trial=8)
        assert not np.array_equal(a.X, c.X)


def test_mixture_noise_facts():
    scen = mixture_noise()
    rec = scen.analytic
    assert np.allclose(rec.theta_star, [1.0, 1.0])
    assert rec.risk_star == pytest.approx(90.9, rel=1e-12)
    assert np.allclose(rec.G, np.diag([100.0, 1.0]))
    assert rec.C == pytest.approx(90.9 * 2.0, rel=1e-12)  # independent noise: R* d
    s = scen.generate(BIG, seed=1)
    assert np.all(s.X[:, 1] == 1.0)
    noise = s.Y - s.X @ rec.theta_star
    assert float(np.mean(noise**2)) == pytest.approx(90.9, rel=0.05)


def test_censored_gaussian_facts():
    scen = censored_gaussian(p=0.25, d=5)
    rec = scen.analytic
    assert rec.kappa1 == pytest.approx(3.0 / 0.25, rel=1e-12)
    assert rec.kappa2 == pytest.approx(3.0 / 0.25, rel=1e-12)
    # uncensored Gaussian coefficients sum to 6
    assert 3.0 + 3.0 == 6.0
    s = scen.generate(BIG, seed=2)
    zero_rows = np.all(s.X == 0.0, axis=1)
    assert float(np.mean(zero_rows)) == pytest.approx(0.75, abs=0.01)
    full = censored_gaussian(p=1.0, d=3)
    s_full = full.generate(1000, seed=3)
    assert not np.any(np.all(s_full.X == 0.0, axis=1))
    assert full.analytic.kappa1 == pytest.approx(3.0, rel=1e-12)


def test_rademacher_kurtosis_facts():
    plain = scaled_gaussian_rademacher(d=4)
    assert plain.analytic.kappa1 == pytest.approx(3.0, rel=1e-12)
    heavy = scaled_gaussian_rademacher(d=4, rho_dist=two_point_rho(10.0))
    assert heavy.analytic.kappa1 == pytest.approx(30.0, rel=1e-12)
    assert rho_fourth_moment(two_point_rho(10.0)) == pytest.approx(10.0, rel=1e-12)
    # dimensional factor tends to 1/4
    for d in (4, 16, 64):
        scen = scaled_gaussian_rademacher(d=d)
        rec = scen.analytic
        factor = rec.C / (d * rec.risk_star * (rec.kappa1 + rec.kappa2))
        assert factor == pytest.approx((1 + 2 / d) / (4 + 2 / d), rel=1e-12)
    assert (1 + 2 / 1e9) / (4 + 2 / 1e9) == pytest.approx(0.25, abs=1e-9)


def test_rademacher_heavy_rate_constant_dominates():
    scen = scaled_gaussian_rademacher(d=4, rho_dist=two_point_rho(5.0))
    rec = scen.analytic
    assert rec.C / (4 * rec.risk_star) > 5.0  # far above the naive d R* heuristic


def test_two_radius_facts():
    equal = two_radius_sphere(d=3, a=2.0, b=2.0)
    rec = equal.analytic
    assert rec.C / (3 * rec.risk_star) == pytest.approx(1.0, rel=1e-12)
    wide = two_radius_sphere(d=4, a=10.0, b=1.0)
    rec = wide.analytic
    assert rec.C / (4 * rec.risk_star) == pytest.approx(0.039212, abs=5e-7)
    assert np.trace(rec.G) == pytest.approx((100.0 + 1.0) / 2.0, rel=1e-12)
    s = wide.generate(5000, seed=4)
    norms = np.linalg.norm(s.X, axis=1)
    assert set(np.round(norms, 9)) <= {10.0, 1.0}


def test_histogram_facts():
    ones = histogram_sample(200, 1, seed=5)
    assert np.all(ones == 1.0)
    X = histogram_sample(100000, 8, seed=6)
    assert np.all(X.sum(axis=1) == 1.0)
    assert np.all((X == 0.0) | (X == 1.0))
    emp = X.T @ X / X.shape[0]
    assert np.max(np.abs(emp - np.eye(8) / 8.0)) < 0.01
    proj = X[:, 0]
    ratio = np.mean(proj**4) / np.mean(proj**2) ** 2
    assert ratio == pytest.approx(8.0, rel=0.1)
    assert histogram_design(8).analytic.kappa1 == 8.0


@pytest.mark.parametrize("name", ["mixture_noise", "gaussian_iid", "censored_gaussian",
                                  "scaled_gaussian_rademacher", "two_radius_sphere"])
def test_analytic_records_match_large_sample(name):
    scen = make_scenario(name)
    rec = scen.analytic
    s = scen.generate(BIG, seed=10)
    emp_G = s.X.T @ s.X / BIG
    assert np.linalg.norm(emp_G - rec.G) <= 0.01 * max(1.0, np.linalg.norm(rec.G))
    noise = s.Y - s.X @ rec.theta_star
    emp_risk = float(np.mean(noise**2))
    assert emp_risk == pytest.approx(rec.risk_star, rel=0.05)
    if rec.C is not None and rec.C > 0.0:
        emp_C = exact_rate_constant(s.X, s.Y, rec.theta_star, rec.G)
        assert emp_C == pytest.approx(rec.C, rel=0.05)
    if rec.kappa2 is not None and rec.kappa2 > 0.0:
        emp_k2 = float(np.mean(noise**4) / np.mean(noise**2) ** 2)
        assert emp_k2 == pytest.approx(rec.kappa2, rel=0.05)


def test_gaussian_directional_kurtosis():
    scen = gaussian_iid(d=3, sigma=1.0)
    s = scen.generate(BIG, seed=11)
    rng = np.random.default_rng(0)
    for _ in range(5):
        theta = rng.standard_normal(3)
        proj = s.X @ theta
        k = float(np.mean(proj**4) / np.mean(proj**2) ** 2)
        assert k == pytest.approx(3.0, rel=0.05)


def test_design_kurtosis_matches_kappa1_along_axes():
    for name in ("gaussian_iid", "censored_gaussian", "scaled_gaussian_rademacher"):
        scen = make_scenario(name)
        rec = scen.analytic
        s = scen.generate(BIG, seed=12)
        proj = s.X[:, 0]
        k = float(np.mean(proj**4) / np.mean(proj**2) ** 2)
        assert k == pytest.approx(rec.kappa1, rel=0.05)


def test_two_point_rho_validation():
    with pytest.raises(ValueError):
        two_point_rho(0.5)
    with pytest.raises(ValueError):
        scaled_gaussian_rademacher(d=2, rho_dist={"kind": "two_point", "sq_values": (2.0, 1.0), "prob": 0.9}).generate(10, seed=1)


def test_scenario_config_roundtrip():
    scen = scenario_from_config({"name": "two_radius_sphere", "params": {"d": 3, "a": 4.0, "b": 2.0}})
    assert scen.name == "two_radius_sphere"
    assert scen.params["a"] == 4.0
    with pytest.raises(KeyError):
        make_scenario("nope")
    with pytest.raises(ValueError):
        scenario_from_config({"params": {}})


def test_make_scenario_accepts_hyphens():
    assert make_scenario("mixture-noise").name == "mixture_noise"
