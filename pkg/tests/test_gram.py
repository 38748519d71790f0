import math

import numpy as np
import pytest
import scipy.linalg

from gramlab._rng import rng_for
from gramlab.direction import Projections, adaptive_lambda, solve_S
from gramlab.gram import (
    GramEstimate,
    build_sphere_net,
    corollary_radius,
    eigenvalue_report,
    empirical_gram,
    mean_square_scale,
    positive_part,
    robust_gram_iterative,
    robust_gram_net,
    solve_net_qp,
)
from gramlab.scenarios import scaled_gaussian_rademacher


def test_empirical_identity_rows():
    est = empirical_gram(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(est.matrix, 0.5 * np.eye(2), atol=1e-15)
    assert est.rank == 2


def test_empirical_single_row():
    x = np.array([[1.0, 2.0, -1.0]])
    est = empirical_gram(x)
    assert np.allclose(est.matrix, np.outer(x[0], x[0]), atol=1e-15)
    assert est.rank == 1


def test_empirical_quadratic_form_equals_mean_square_projection():
    rng = rng_for(1)
    X = rng.standard_normal((300, 4))
    est = empirical_gram(X)
    for _ in range(10):
        theta = rng.standard_normal(4)
        assert theta @ est.matrix @ theta == pytest.approx(
            float(np.mean((X @ theta) ** 2)), rel=1e-12
        )


def test_empirical_law_of_large_numbers():
    rng = rng_for(2)
    X = rng.standard_normal((100000, 3))
    est = empirical_gram(X)
    assert np.max(np.abs(est.matrix - np.eye(3))) < 0.05


def test_polarization_identity_exact():
    rng = rng_for(3)
    for _ in range(20):
        G0 = rng.standard_normal((4, 4))
        G0 = 0.5 * (G0 + G0.T)

        def energy(v):
            return float(v @ G0 @ v)

        for i in range(4):
            for j in range(4):
                ei = np.eye(4)[i]
                ej = np.eye(4)[j]
                rebuilt = 0.25 * (energy(ei + ej) - energy(ei - ej))
                assert abs(rebuilt - G0[i, j]) <= 1e-12 * max(1.0, abs(G0[i, j]))


def test_iterative_mean_backend_reproduces_empirical():
    rng = rng_for(4)
    X = rng.standard_normal((60, 3)) @ np.diag([2.0, 1.0, 0.3])
    emp = X.T @ X / 60
    est = robust_gram_iterative(X, iters=1, scale=mean_square_scale)
    assert np.max(np.abs(est.matrix - emp)) <= 1e-12 * max(1.0, np.abs(emp).max())


def test_iterative_zero_variance_projections_reduce_to_empirical():
    # rows are +-c e1: every eigen-coordinate projection has constant
    # square, so the robust scale falls back to the plain mean
    c = 3.0
    X = np.array([[c, 0.0], [-c, 0.0], [c, 0.0], [-c, 0.0]])
    emp = X.T @ X / 4
    est = robust_gram_iterative(X, iters=3)
    assert np.allclose(est.matrix, emp, atol=1e-12)


def test_iterative_gaussian_comparable_to_empirical():
    rng = rng_for(5)
    G_true = np.eye(2)
    rob_err, emp_err = [], []
    for trial in range(100):
        X = rng.standard_normal((10000, 2))
        emp = X.T @ X / X.shape[0]
        rob = robust_gram_iterative(X, eps=0.05, iters=5).matrix
        emp_err.append(np.linalg.norm(emp - G_true))
        rob_err.append(np.linalg.norm(rob - G_true))
    assert np.median(rob_err) <= 1.5 * np.median(emp_err)


def test_iterative_beats_empirical_on_heavy_tails():
    scen = scaled_gaussian_rademacher(d=2, rho_dist={"kind": "two_point", "sq_values": (8.0, 0.22222222222222215), "prob": 0.1})
    G_true = scen.analytic.G
    rob_err, emp_err = [], []
    for trial in range(100):
        s = scen.generate(2000, seed=50, trial=trial)
        X = s.X
        emp = X.T @ X / X.shape[0]
        rob = robust_gram_iterative(X, eps=0.05, iters=5).matrix
        emp_err.append(np.linalg.norm(emp - G_true))
        rob_err.append(np.linalg.norm(rob - G_true))
    assert np.median(rob_err) < np.median(emp_err)


def test_kernel_recovery_iterative():
    rng = rng_for(6)
    base = rng.standard_normal((40, 2))
    X = np.column_stack([base, np.zeros(40)])
    est = robust_gram_iterative(X, iters=5)
    theta = np.array([0.0, 0.0, 1.0])
    assert abs(theta @ est.matrix @ theta) <= 1e-12 * np.trace(np.abs(est.matrix))


def test_net_dimension_one():
    X = np.array([[2.0, 2.0], [-1.0, -1.0], [3.0, 3.0]])
    net = build_sphere_net(X, rho=0.3)
    assert len(net) == 2
    v = np.array([1.0, 1.0]) / math.sqrt(2.0)
    got = {tuple(np.round(d, 12)) for d in net.directions}
    assert got == {tuple(np.round(v, 12)), tuple(np.round(-v, 12))}
    assert net.covering_estimate == 0.0


def test_net_dimension_two_count_and_cover():
    rng = rng_for(7)
    X = rng.standard_normal((50, 2))
    net = build_sphere_net(X, rho=0.1, probes=10000)
    assert len(net) == math.ceil(2.0 * math.pi / (2.0 * math.asin(0.05)))
    assert net.covering_estimate <= 0.1
    probes = rng.standard_normal((10000, 2))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    dists = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * probes @ net.directions.T)).min(axis=1)
    assert dists.max() <= 0.1


def test_net_dimension_three_cover():
    rng = rng_for(8)
    X = rng.standard_normal((100, 3))
    net = build_sphere_net(X, rho=0.25, probes=10000)
    probes = rng.standard_normal((10000, 3))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    dists = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * probes @ net.directions.T)).min(axis=1)
    assert dists.max() <= 0.25


def test_net_high_dimension_best_effort():
    rng = rng_for(9)
    X = rng.standard_normal((100, 5))
    net = build_sphere_net(X, rho=0.5)
    assert net.covering_estimate > 0.0  # reported, no guarantee
    assert np.allclose(np.linalg.norm(net.directions, axis=1), 1.0, atol=1e-12)


def test_net_directions_live_in_span():
    rng = rng_for(10)
    base = rng.standard_normal((30, 2))
    embed = np.zeros((30, 4))
    embed[:, :2] = base
    net = build_sphere_net(embed, rho=0.2)
    assert np.max(np.abs(net.directions[:, 2:])) <= 1e-12


def test_net_rejects_zero_span():
    with pytest.raises(ValueError):
        build_sphere_net(np.zeros((5, 3)), rho=0.2)


def test_corollary_radius_rule():
    assert corollary_radius(0.1, 2.0, 10.0) == pytest.approx(0.1**2 * 2.0 / 20.0, rel=1e-14)


def test_qp_orthogonal_directions():
    H, z, violation, _ = solve_net_qp(np.eye(2), [2.0, 3.0], 0.1)
    assert np.allclose(H, np.diag([1.8, 2.7]), atol=1e-10)
    assert violation <= 1e-10


def test_qp_complementary_slackness():
    rng = rng_for(11)
    net = build_sphere_net(np.eye(2), rho=0.2, probes=500)
    A = rng.standard_normal((2, 2))
    G0 = A @ A.T + 0.2 * np.eye(2)
    nhat = np.einsum("ij,ij->i", net.directions @ G0, net.directions)
    _, z, violation, _ = solve_net_qp(net.directions, nhat, 0.1)
    pos = np.maximum(z, 0.0)
    neg = np.maximum(-z, 0.0)
    assert float(np.max(pos * neg)) == 0.0
    assert violation <= 1e-6 * nhat.max()


def test_qp_recovers_generator_as_delta_shrinks():
    rng = rng_for(12)
    net = build_sphere_net(np.eye(2), rho=0.05, probes=500)
    A = rng.standard_normal((2, 2))
    G0 = A @ A.T + 0.5 * np.eye(2)
    nhat = np.einsum("ij,ij->i", net.directions @ G0, net.directions)
    H, _, violation, _ = solve_net_qp(net.directions, nhat, 0.002)
    assert violation <= 1e-6 * nhat.max()
    assert np.linalg.norm(H - G0) <= 0.02 * np.linalg.norm(G0)


def test_qp_minimality_against_feasible_perturbations():
    rng = rng_for(13)
    net = build_sphere_net(np.eye(2), rho=0.15, probes=500)
    D = net.directions
    A = rng.standard_normal((2, 2))
    G0 = A @ A.T + 0.5 * np.eye(2)
    nhat = np.einsum("ij,ij->i", D @ G0, D)
    delta = 0.15
    H, _, violation, _ = solve_net_qp(D, nhat, delta)
    lo, hi = (1 - delta) * nhat, (1 + delta) * nhat
    base = np.trace(H @ H)
    tried = accepted = 0
    while accepted < 100 and tried < 2000:
        tried += 1
        E = rng.standard_normal((2, 2)) * 0.1
        E = 0.5 * (E + E.T)
        t = rng.uniform(0.0, 0.5)
        cand = (1 - t) * H + t * G0 + E
        q = np.einsum("ij,ij->i", D @ cand, D)
        if np.all(q >= lo - 1e-12) and np.all(q <= hi + 1e-12):
            accepted += 1
            assert base <= np.trace(cand @ cand) + 1e-6
    assert accepted == 100


def test_robust_gram_net_end_to_end():
    rng = rng_for(14)
    X = rng.standard_normal((3000, 2)) @ np.array([[1.5, 0.3], [0.0, 0.8]])
    G_true = np.array([[1.5, 0.3], [0.0, 0.8]]).T @ np.array([[1.5, 0.3], [0.0, 0.8]])
    est = robust_gram_net(X, eps=0.05, delta=0.2, rho=0.05)
    assert est.method == "robust_net"
    assert est.constraint_violation <= 1e-6 * np.trace(G_true) * 2
    # the quadratic form must match the truth within the slack plus
    # sampling error on every net direction
    for theta in np.eye(2):
        ratio = (theta @ est.matrix @ theta) / (theta @ G_true @ theta)
        assert 0.6 <= ratio <= 1.4


def test_robust_gram_net_delta_from_kappa():
    rng = rng_for(15)
    X = rng.standard_normal((60000, 2))
    est = robust_gram_net(X, eps=0.01, rho=0.1, kappa=3.0)
    assert est.method == "robust_net"
    with pytest.raises(ValueError):
        robust_gram_net(X, eps=0.01, rho=0.1)  # neither delta nor kappa


def test_kernel_recovery_net():
    rng = rng_for(16)
    base = rng.standard_normal((50, 2))
    X = np.column_stack([base, np.zeros(50)])
    est = robust_gram_net(X, delta=0.2, rho=0.1)
    theta = np.array([0.0, 0.0, 1.0])
    assert abs(theta @ est.matrix @ theta) <= 1e-14 * max(1.0, np.trace(np.abs(est.matrix)))


def test_positive_part_psd_unchanged():
    rng = rng_for(17)
    A = rng.standard_normal((3, 3))
    P = A @ A.T
    out = positive_part(P)
    assert np.max(np.abs(out.matrix - P)) <= 1e-12 * np.abs(P).max()


def test_positive_part_clips_negative():
    out = positive_part(np.diag([1.0, -1.0]))
    assert np.allclose(out.matrix, np.diag([1.0, 0.0]), atol=1e-14)


def test_positive_part_matches_independent_eigensolver():
    rng = rng_for(18)
    for _ in range(10):
        M = rng.standard_normal((4, 4))
        M = 0.5 * (M + M.T)
        w, V = scipy.linalg.eigh(M)
        oracle = (V * np.maximum(w, 0.0)) @ V.T
        out = positive_part(M)
        assert np.max(np.abs(out.matrix - oracle)) <= 1e-10 * max(1.0, np.abs(M).max())


def test_eigenvalue_report_basic():
    rng = rng_for(19)
    A = rng.standard_normal((3, 3))
    G0 = A @ A.T + 0.1 * np.eye(3)
    assert eigenvalue_report(G0, G0) == 0.0
    assert eigenvalue_report(1.1 * G0, G0) == pytest.approx(0.1, rel=1e-10)


def test_eigenvalue_report_zero_conventions():
    assert eigenvalue_report(np.diag([1.0, 0.0]), np.diag([2.0, 0.0])) == pytest.approx(0.5)
    assert eigenvalue_report(np.diag([1.0, 1.0]), np.diag([1.0, 0.0])) == math.inf


def test_eigenvalue_ratio_propagation():
    # if the quadratic forms agree within a factor 1 +- delta everywhere,
    # sorted eigenvalues agree within the same factor
    rng = rng_for(20)
    delta = 0.15
    for _ in range(10):
        A = rng.standard_normal((3, 3))
        G0 = A @ A.T + 0.2 * np.eye(3)
        w, V = np.linalg.eigh(G0)
        root = (V * np.sqrt(w)) @ V.T
        E = rng.standard_normal((3, 3))
        E = 0.5 * (E + E.T)
        E *= delta / max(1e-12, np.abs(np.linalg.eigvalsh(E)).max())
        Ghat = root @ (np.eye(3) + E) @ root
        # ratio bound holds for every direction by construction
        assert eigenvalue_report(Ghat, G0) <= delta + 1e-9


def test_eigenvalue_minmax_brute_force():
    # sup over i-dim subspaces of the minimal quadratic form value equals
    # the i-th eigenvalue; including the top eigenvector subspace makes
    # the sampled sup attain it
    rng = rng_for(21)
    A = rng.standard_normal((3, 3))
    M = A @ A.T
    w, V = np.linalg.eigh(M)
    w_desc = w[::-1]
    V_desc = V[:, ::-1]
    for i in (1, 2, 3):
        best = -np.inf
        candidates = [V_desc[:, :i]]
        for _ in range(200):
            Q, _ = np.linalg.qr(rng.standard_normal((3, i)))
            candidates.append(Q)
        for Q in candidates:
            inner = np.linalg.eigvalsh(Q.T @ M @ Q).min()
            best = max(best, inner)
        assert best == pytest.approx(w_desc[i - 1], rel=1e-9)


def test_net_radius_from_corollary_rule_workflow():
    rng = rng_for(22)
    X = rng.standard_normal((4000, 2))
    delta = 0.2
    basis_vals = [
        solve_S(Projections(X @ e), adaptive_lambda(Projections(X @ e), 0.05)).value
        for e in np.eye(2)
    ]
    coarse = build_sphere_net(X, rho=0.3)
    nhat_coarse = [
        solve_S(Projections(X @ th), adaptive_lambda(Projections(X @ th), 0.05)).value
        for th in coarse.directions
    ]
    rho = corollary_radius(delta, min(nhat_coarse), sum(basis_vals))
    assert 0.0 < rho < 0.3
    net = build_sphere_net(X, rho=rho)
    est = robust_gram_net(X, delta=delta, net=net)
    assert est.iterations_or_net_size == len(net)
