import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from volmi.core import JointDistribution, random_rational_joint
from volmi.errors import ConfigurationError, PreconditionError
from volmi.estimators import (AveragedUStat, CompiledEstimator, FirstK,
                              SampleBatch, compile_ube, evaluate_ube,
                              exact_expectation)
from volmi.measures import dmi_squared_poly
from volmi.polyalg import MultiPoly

H = F(1, 2)
DIAG = JointDistribution([[H, 0], [0, H]])


def random_poly(rng, max_deg=4):
    terms = {}
    for _ in range(int(rng.integers(1, 5))):
        exps = [0, 0, 0, 0]
        for _ in range(int(rng.integers(0, max_deg + 1))):
            exps[int(rng.integers(0, 4))] += 1
        terms[tuple(exps)] = F(int(rng.integers(-9, 10)) or 1,
                               int(rng.integers(1, 7)))
    return MultiPoly(4, terms)


def flat(U):
    return [v for row in U.entries for v in row]


def test_compile_examples():
    est = compile_ube(MultiPoly.monomial(4, (1, 0, 0, 1)), FirstK())
    assert est.d == 2
    assert est.monomials[0].factors == ((0, 0), (1, 1))
    assert compile_ube(dmi_squared_poly(2)).d == 4
    const = compile_ube(MultiPoly.constant(4, 1), FirstK())
    assert evaluate_ube(const, [(0, 0)]) == 1
    assert all(len(m.factors) <= est.d for m in est.monomials)


def test_evaluate_examples():
    est = compile_ube(MultiPoly.monomial(4, (1, 0, 0, 1)), FirstK())
    assert evaluate_ube(est, [(0, 0), (1, 1)]) == 1
    assert evaluate_ube(est, [(0, 0), (0, 0)]) == 0
    exact = compile_ube(MultiPoly.monomial(4, (1, 0, 0, 1)), AveragedUStat())
    assert evaluate_ube(exact, [(1, 1), (0, 0)]) == H
    with pytest.raises(PreconditionError) as err:
        evaluate_ube(est, [(0, 0)])
    assert "2" in str(err.value)


def test_sample_batch_validation():
    b = SampleBatch(2, [(0, 1), (1, 0)])
    assert len(b) == 2
    assert SampleBatch.from_json(b.to_json(), 2) == b
    assert SampleBatch.from_csv(b.to_csv(), 2) == b
    assert b.to_csv().splitlines()[0] == "task,alice,bob"
    with pytest.raises(ConfigurationError):
        SampleBatch(2, [(0, 2)])
    with pytest.raises(ConfigurationError):
        SampleBatch(2, [])
    with pytest.raises(ConfigurationError):
        SampleBatch.from_csv("alice,bob\n0,1\n", 2)


def test_exact_expectation_examples():
    est = compile_ube(MultiPoly.monomial(4, (1, 0, 0, 1)), FirstK())
    assert exact_expectation(est, DIAG, 2) == F(1, 4)
    dmi2 = compile_ube(dmi_squared_poly(2), FirstK())
    assert exact_expectation(dmi2, DIAG, 4) == F(1, 16)
    const = compile_ube(MultiPoly.constant(4, F(2, 3)), AveragedUStat())
    assert exact_expectation(const, random_rational_joint(2, 0), 3) == F(2, 3)
    with pytest.raises(PreconditionError):
        exact_expectation(dmi2, DIAG, 3)          # T below degree
    with pytest.raises(PreconditionError):
        exact_expectation(dmi2, DIAG, 12)         # enumeration cap


def test_unbiasedness_all_policies():
    # the core claim: E[estimator] equals the polynomial value exactly,
    # for every policy and T in {d, d+1, d+2}
    rng = np.random.default_rng(2024)
    for trial in range(50):
        poly = random_poly(rng)
        U = random_rational_joint(2, 777 + trial)
        value = poly.eval(flat(U))
        d = max(poly.degree(), 1)
        for policy in (FirstK(), AveragedUStat(),
                       AveragedUStat(subsample=11, seed=trial)):
            est = compile_ube(poly, policy)
            for T in (d, d + 1, d + 2):
                assert exact_expectation(est, U, T) == value, (trial, policy, T)


def test_ustat_counting_equals_enumeration():
    # the falling-factorial closed form equals the literal average over all
    # ordered k-subsets (independent double check of the identity)
    rng = np.random.default_rng(17)
    poly = MultiPoly(4, {(2, 0, 0, 1): F(3, 5), (0, 1, 1, 0): F(-1, 2)})
    est = compile_ube(poly, AveragedUStat())
    for _ in range(30):
        T = int(rng.integers(3, 6))
        batch = [(int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                 for _ in range(T)]
        fast = evaluate_ube(est, batch)
        slow = F(0)
        for mono in est.monomials:
            k = len(mono.factors)
            hits = 0
            subsets = list(itertools.permutations(range(T), k))
            for idx in subsets:
                if all(batch[i] == f for i, f in zip(idx, mono.factors)):
                    hits += 1
            slow += mono.coef * F(hits, len(subsets))
        assert fast == slow


def test_permutation_sensitivity():
    poly = MultiPoly.monomial(4, (1, 0, 0, 1))
    batch = [(0, 0), (1, 1), (0, 1)]
    perm = [(0, 1), (0, 0), (1, 1)]
    firstk = compile_ube(poly, FirstK())
    assert evaluate_ube(firstk, batch) != evaluate_ube(firstk, perm)
    ustat = compile_ube(poly, AveragedUStat())
    for p in itertools.permutations(batch):
        assert evaluate_ube(ustat, list(p)) == evaluate_ube(ustat, batch)


def test_policy_variance_comparison():
    # reported, not asserted as an invariant: the averaged U-statistic has no
    # larger variance than FirstK for a nonconstant estimator
    rng = np.random.default_rng(5)
    poly = dmi_squared_poly(2)
    probs = [float(v) for v in np.asarray(DIAG.float_entries()).reshape(-1)]
    samples = rng.choice(4, size=(10_000, 5), p=probs)
    batches = [[(s // 2, s % 2) for s in row] for row in samples]
    first = np.asarray([float(evaluate_ube(compile_ube(poly, FirstK()), b))
                        for b in batches])
    ustat = np.asarray([float(evaluate_ube(compile_ube(poly, AveragedUStat()), b))
                        for b in batches])
    assert abs(first.mean() - ustat.mean()) < 0.02
    assert ustat.var() <= first.var() + 1e-12


def test_estimator_json_round_trip():
    est = compile_ube(dmi_squared_poly(2), AveragedUStat(subsample=50, seed=3))
    back = CompiledEstimator.from_json(est.to_json())
    assert back.poly == est.poly and back.policy == est.policy
    batch = [(0, 0), (1, 1), (1, 0), (0, 1), (0, 0)]
    assert evaluate_ube(back, batch) == evaluate_ube(est, batch)
