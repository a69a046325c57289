import math

import numpy as np
import pytest
from scipy.special import comb

from bettilab.ensembles import (
    FockField,
    GaussianSampleSpec,
    covariance_probe,
    fock_truncation_degree,
    homogeneous_indices,
    indices_up_to,
    kostlan_binary_diagonals,
    sample_fock,
    sample_kostlan,
    sample_to_json_dict,
)
from bettilab.polycore import fock_norm_sq
from bettilab.zeroset import real_root_count


def test_homogeneous_indices_count_and_order():
    idx = homogeneous_indices(3, 4)
    assert len(idx) == comb(4 + 2, 2, exact=True)
    assert all(sum(a) == 4 for a in idx)
    assert idx == sorted(idx)  # lexicographic


def test_indices_up_to():
    idx = indices_up_to(2, 3)
    assert len(idx) == comb(3 + 2, 2, exact=True)
    assert max(sum(a) for a in idx) == 3
    assert (0, 0) in idx


def test_fock_truncation_tail_rule():
    for r, tol in ((1.0, 1e-6), (2.0, 1e-6), (0.5, 1e-3)):
        D = fock_truncation_degree(r, tol)
        lam = math.pi * r * r
        full = math.exp(lam)
        tail = sum(
            math.exp(k * math.log(lam) - math.lgamma(k + 1))
            for k in range(D + 1, D + 300)
        )
        assert tail < tol * full
        # D is minimal up to the geometric-series slack in the stopping rule:
        # one layer earlier must already exceed a comfortable fraction of tol
        tail_prev = tail + math.exp(D * math.log(lam) - math.lgamma(D + 1))
        assert tail_prev > 0.3 * tol * full


# ---------------------------------------------------------------------------
# Kostlan sampler
# ---------------------------------------------------------------------------
def test_kostlan_reproducible_and_streams_independent():
    a = sample_kostlan(2, 3, seed=42, index=5)
    b = sample_kostlan(2, 3, seed=42, index=5)
    assert a.terms == b.terms
    c = sample_kostlan(2, 3, seed=42, index=6)
    assert a.terms != c.terms


def test_kostlan_coefficient_variance():
    # Var(coef of x^alpha) = d!/alpha! = multinomial(d; alpha)
    n, d, N = 2, 4, 3000
    idxs = homogeneous_indices(n + 1, d)
    acc = {a: [] for a in idxs}
    for k in range(N):
        p = sample_kostlan(n, d, seed=7, index=k)
        for a in idxs:
            acc[a].append(p.terms.get(a, 0.0))
    for a in idxs:
        want = math.factorial(d)
        for e in a:
            want /= math.factorial(e)
        got = np.var(np.array(acc[a]), ddof=1)
        # sample variance of N chi^2-ish values: ~ sqrt(2/N) relative noise
        assert got == pytest.approx(want, rel=6.0 * math.sqrt(2.0 / N)), a


def test_kostlan_covariance_is_inner_product_power():
    spec = GaussianSampleSpec("kostlan", 2, 3, seed=11)
    x = np.array([0.6, -0.2, 0.7])
    y = np.array([0.1, 0.5, -0.3])
    est = covariance_probe(spec, x, y, samples=60_000)
    want = float(x @ y) ** 3
    assert abs(est.value - want) <= 3.5 * est.stderr


def test_kostlan_variance_norm_power():
    spec = GaussianSampleSpec("kostlan", 1, 5, seed=3)
    x = np.array([0.8, 0.4])
    est = covariance_probe(spec, x, x, samples=40_000)
    want = float(x @ x) ** 5
    assert abs(est.value - want) <= 3.5 * est.stderr


def test_binary_diagonals_bit_identical_to_generic_sampler():
    for d in (1, 4, 10, 33):
        rows = kostlan_binary_diagonals(d, seed=9, start=17, count=3)
        for j in range(3):
            p = sample_kostlan(1, d, seed=9, index=17 + j)
            # term (a, d-a) multiplies x0^a x1^{d-a} -> diagonal entry a
            for a in range(d + 1):
                assert rows[j, a] == p.terms.get((a, d - a), 0.0), (d, j, a)


def test_binary_diagonals_shape_and_guard():
    assert kostlan_binary_diagonals(3, 0, 0, 5).shape == (5, 4)
    with pytest.raises(ValueError):
        kostlan_binary_diagonals(0, 0, 0, 1)


# ---------------------------------------------------------------------------
# analytic (flat-kernel) sampler
# ---------------------------------------------------------------------------
def test_fock_field_reproducible():
    f = sample_fock(2, 6, seed=1, index=2)
    g = sample_fock(2, 6, seed=1, index=2)
    assert f.coefficients == g.coefficients


def test_fock_covariance_kernel_spot_values():
    # E f(x) f(y) -> e^{pi <x,y>} as the truncation grows
    spec = GaussianSampleSpec("fock", 1, fock_truncation_degree(1.0), seed=13)
    for xv, yv in ((0.3, 0.5), (-0.4, 0.6), (0.9, 0.9)):
        est = covariance_probe(
            spec, np.array([xv]), np.array([yv]), samples=60_000
        )
        want = math.exp(math.pi * xv * yv)
        assert abs(est.value - want) <= 3.5 * est.stderr + 1e-4 * want, (xv, yv)


def test_fock_variance_matches_kernel_diagonal():
    spec = GaussianSampleSpec("fock", 2, fock_truncation_degree(1.0), seed=4)
    x = np.array([0.5, -0.5])
    est = covariance_probe(spec, x, x, samples=60_000)
    want = math.exp(math.pi * float(x @ x))
    assert abs(est.value - want) <= 3.5 * est.stderr + 1e-4 * want


def test_fock_field_evaluations_agree():
    f = sample_fock(2, 5, seed=8)
    p = f.as_multipoly()
    pts = np.random.default_rng(2).uniform(-1, 1, size=(20, 2))
    got = f.at_points(pts)
    want = p.evaluate_many(pts)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
    xs = np.linspace(-1, 1, 9)
    ys = np.linspace(-1, 1, 7)
    assert np.allclose(f.on_grid(xs, ys), p.on_grid(xs, ys), rtol=1e-12)


def test_fock_gradient_agrees_with_finite_differences():
    f = sample_fock(2, 5, seed=8)
    pts = np.array([[0.3, -0.2], [0.0, 0.9]])
    G = f.gradient_at_points(pts)
    h = 1e-6
    for r, x in enumerate(pts):
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (f.at_points((x + e)[None]) - f.at_points((x - e)[None]))[0] / (2 * h)
            assert G[r, k] == pytest.approx(fd, rel=1e-5, abs=1e-6)
    gn = f.grad_norm_on_grid(pts[:, 0], pts[:, 1])
    # grid is the tensor product; diagonal entries match the point gradients
    assert gn[0, 0] == pytest.approx(np.hypot(*G[0]), rel=1e-12)
    assert gn[1, 1] == pytest.approx(np.hypot(*G[1]), rel=1e-12)


def test_fock_norm_matches_coefficient_square_sum():
    # the sampler draws unit normals against the orthonormal weighted basis,
    # so the reproducing-kernel norm of a sample is the plain coefficient
    # square sum
    f = sample_fock(2, 4, seed=5)
    total = sum(c * c for c in f.coefficients.values())
    assert fock_norm_sq(f.as_multipoly()) == pytest.approx(total, rel=1e-10)


def test_expected_zero_count_on_interval():
    # stationary unit-variance-rate field: expected zeros of the 1-d field on
    # [-1, 1] equal 2/sqrt(pi); truncation D for radius 1 keeps the bias far
    # below the Monte-Carlo noise
    D = fock_truncation_degree(1.0)
    N = 1500
    counts = np.empty(N)
    for k in range(N):
        f = sample_fock(1, D, seed=77, index=k)
        coeffs = f._dense_coefs()
        counts[k] = real_root_count(coeffs, interval=(-1.0, 1.0)).count
    want = 2.0 / math.sqrt(math.pi)
    se = counts.std(ddof=1) / math.sqrt(N)
    assert abs(counts.mean() - want) <= 3.0 * se


# ---------------------------------------------------------------------------
# specs and serialization
# ---------------------------------------------------------------------------
def test_spec_validation():
    with pytest.raises(ValueError):
        GaussianSampleSpec("grf", 1, 2, 0)
    with pytest.raises(ValueError):
        GaussianSampleSpec("kostlan", 0, 2, 0)


def test_spec_weights_match_models():
    ks = GaussianSampleSpec("kostlan", 1, 3, seed=0)
    w = ks.weights()
    assert w.size == 4
    assert w[0] == pytest.approx(1.0)  # alpha = (0, 3): sqrt(3!/0!3!) = 1
    fk = GaussianSampleSpec("fock", 1, 2, seed=0)
    wf = fk.weights()
    assert wf.size == 3


def test_sample_json_round_trip():
    spec = GaussianSampleSpec("kostlan", 1, 4, seed=2)
    d = sample_to_json_dict(spec, index=3)
    assert d["spec"]["model"] == "kostlan"
    assert d["spec"]["index"] == 3
    p = spec.sample(index=3)
    from bettilab.polycore import MultiPoly

    q = MultiPoly.from_json_dict(d["poly"])
    assert q.terms == p.terms


def test_covariance_probe_thread_invariance():
    spec = GaussianSampleSpec("fock", 1, 6, seed=19)
    a = covariance_probe(spec, np.array([0.2]), np.array([0.4]), 2048, threads=1)
    b = covariance_probe(spec, np.array([0.2]), np.array([0.4]), 2048, threads=4)
    assert a.value == b.value and a.stderr == b.stderr
