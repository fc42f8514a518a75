import json

import numpy as np
import pytest

from ratio_cs import numerics as nx
from ratio_cs.errors import InvalidSparsity
from ratio_cs.model import (CoefficientDistribution, ProblemInstance, SparseSignal, best_k_term,
                            generate_signal, load_bundle, random_instance, recovery_success,
                            refit_on_support, save_bundle, top_k_indices)


def test_sparse_signal_support():
    x = SparseSignal([0.0, 2.0, 0.0, -1.0])
    assert x.support == (1, 3) and x.s == 2 and x.n == 4


def test_generate_signal_full_support():
    x = generate_signal(nx.seeded_rng(0), 5, 5, CoefficientDistribution.uniform_sym(10))
    assert x.support == (0, 1, 2, 3, 4)


def test_generate_signal_annulus_magnitudes():
    x = generate_signal(nx.seeded_rng(1), 250, 16, CoefficientDistribution.uniform_annulus(5, 10))
    mags = np.abs(x.values[list(x.support)])
    assert x.s == 16 and mags.min() >= 5 and mags.max() <= 10


def test_generate_signal_support_uniform():
    rng = nx.seeded_rng(2)
    dist = CoefficientDistribution.uniform_sym(10)
    counts = np.zeros(250)
    draws = 10_000
    for _ in range(draws):
        counts[list(generate_signal(rng, 250, 16, dist).support)] += 1
    p = 16 / 250
    mu, sd = draws * p, np.sqrt(draws * p * (1 - p))
    assert np.abs(counts - mu).max() <= 4 * sd


def test_generate_signal_rejects_bad_s():
    with pytest.raises(InvalidSparsity):
        generate_signal(nx.seeded_rng(0), 4, 5, CoefficientDistribution.uniform_sym())


def test_distribution_validation_and_round_trip():
    with pytest.raises(ValueError):
        CoefficientDistribution.uniform_annulus(10, 5)
    d = CoefficientDistribution.uniform_annulus(5, 10)
    assert CoefficientDistribution.from_dict(d.to_dict()) == d


def test_best_k_term_examples():
    np.testing.assert_array_equal(best_k_term([3, -5, 1], 2).values, [3, -5, 0])
    np.testing.assert_array_equal(best_k_term([2, 2, 2], 1).values, [2, 0, 0])


def test_best_k_term_matches_sorting_oracle():
    x = nx.seeded_rng(4).standard_normal(250)
    kept = best_k_term(x, 50).values
    oracle = np.sort(np.abs(x))[::-1][50:].sum()
    assert np.isclose(np.abs(x - kept).sum(), oracle, rtol=0, atol=1e-12)


def test_top_k_rejects_bad_k():
    with pytest.raises(InvalidSparsity):
        top_k_indices(np.ones(3), 4)


def test_recovery_success_examples():
    truth = SparseSignal([0, 1.0, 2.0, 0, 0])
    assert recovery_success(truth.values, truth, 3)
    assert not recovery_success(np.eye(5)[3], truth, 1)
    noise = 0.1 * nx.seeded_rng(0).standard_normal(5)
    noise[[1, 2]] = 0
    assert recovery_success(truth.values + noise, truth, 2)


def test_instance_invariants():
    A = np.eye(2)
    with pytest.raises(ValueError):
        ProblemInstance(A, [1.0, 0.0], SparseSignal([0.0, 1.0]))
    inst = ProblemInstance(A, [1.0, 0.05], SparseSignal([1.0, 0.0]), noise_level=0.1)
    assert not inst.noiseless


def test_refit_on_support(gaussian_instance):
    inst = gaussian_instance(3)
    x0 = inst.truth.values
    np.testing.assert_allclose(refit_on_support(inst, inst.truth.support), x0, rtol=1e-8,
                               atol=1e-8 * np.abs(x0).max())
    assert not np.any(refit_on_support(inst, []))
    extra = sorted(set(inst.truth.support) | {0, 1, 2, 3})
    np.testing.assert_allclose(refit_on_support(inst, extra), x0, atol=1e-8 * np.abs(x0).max())


def test_random_instance_noiseless_invariant(gaussian_instance):
    inst = gaussian_instance(0)
    assert np.array_equal(inst.A @ inst.truth.values, inst.b)


def test_bundle_round_trip(tmp_path, gaussian_instance):
    inst = gaussian_instance(1, m=5, n=9, s=2)
    save_bundle(tmp_path / "b", inst, {"seed": 1})
    back, meta = load_bundle(tmp_path / "b")
    assert back.digest() == inst.digest()
    assert np.array_equal(back.truth.values, inst.truth.values)
    assert meta["s"] == 2 and meta["seed"] == 1
    assert json.loads((tmp_path / "b" / "meta.json").read_text())["m"] == 5
