"""Unbiased finite-sample estimation of polynomial mutual information.

A degree-d polynomial in the entries of U is a sum of monomials
prod_k u_{c_k, c'_k}; replacing each factor with the indicator that a
*distinct* sample equals (c_k, c'_k) gives an unbiased estimator from any
T >= d i.i.d. samples.  How factors are assigned to samples is a free choice:

  FirstK          factors go to samples 1..k in order (the fixed-task
                  assignment used by the explicit mechanisms)
  AveragedUStat   the indicator product is averaged over ordered k-subsets,
                  either all of them (exact; computed in closed form through
                  falling-factorial counts) or m seeded random ones

Every policy has the same expectation; they differ in variance and order
sensitivity.  ``exact_expectation`` is the brute-force oracle: it enumerates
all (C^2)^T outcome sequences with exact rational probabilities.
"""

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .core import JointDistribution
from .errors import ConfigurationError, PreconditionError
from .polyalg import MultiPoly
from .rational import to_exact


@dataclass(frozen=True)
class FirstK:
    """Assign monomial factors to the first k samples of the batch."""


@dataclass(frozen=True)
class AveragedUStat:
    """Average over ordered k-subsets; ``subsample=None`` means all of them,
    otherwise ``subsample`` seeded random ordered subsets."""

    subsample: int | None = None
    seed: int = 0


DEFAULT_POLICY = AveragedUStat(subsample=200, seed=0)

Policy = FirstK | AveragedUStat


@dataclass
class SampleBatch:
    """T report pairs over the alphabet {0..C-1}."""

    C: int
    pairs: list[tuple[int, int]]

    def __post_init__(self):
        if len(self.pairs) < 1:
            raise ConfigurationError("batch needs at least one pair")
        self.pairs = [(int(a), int(b)) for a, b in self.pairs]
        if any(not (0 <= a < self.C and 0 <= b < self.C) for a, b in self.pairs):
            raise ConfigurationError("report symbol out of range")

    def __len__(self):
        return len(self.pairs)

    def to_json(self):
        return [[a, b] for a, b in self.pairs]

    @classmethod
    def from_json(cls, obj, C: int) -> "SampleBatch":
        return cls(C, [tuple(p) for p in obj])

    def to_csv(self) -> str:
        lines = ["task,alice,bob"]
        lines += [f"{t},{a},{b}" for t, (a, b) in enumerate(self.pairs)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, C: int) -> "SampleBatch":
        lines = [l.strip() for l in text.strip().splitlines() if l.strip()]
        if not lines or lines[0] != "task,alice,bob":
            raise ConfigurationError("expected CSV header 'task,alice,bob'")
        rows = []
        for line in lines[1:]:
            t, a, b = line.split(",")
            rows.append((int(t), int(a), int(b)))
        rows.sort()
        return cls(C, [(a, b) for _, a, b in rows])


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


@dataclass(frozen=True)
class _Monomial:
    coef: Fraction
    factors: tuple[tuple[int, int], ...]   # ordered (c, c') pairs, len = degree
    counts: tuple[tuple[tuple[int, int], int], ...]  # distinct pair -> multiplicity


class CompiledEstimator:
    """A polynomial MI compiled to indicator products over samples."""

    def __init__(self, poly: MultiPoly, policy: Policy = DEFAULT_POLICY):
        C = isqrt(poly.nvars)
        if C * C != poly.nvars:
            raise ConfigurationError("estimator polynomials need C^2 variables")
        self.poly = poly
        self.C = C
        self.policy = policy
        monomials = []
        for exps, coef in poly.terms.items():
            factors = []
            for v, e in enumerate(exps):
                factors.extend([(v // C, v % C)] * e)
            counts = Counter(factors)
            monomials.append(_Monomial(coef, tuple(factors),
                                       tuple(sorted(counts.items()))))
        self.monomials = monomials
        self.d = poly.degree()

    def __repr__(self):
        return (f"CompiledEstimator(d={self.d}, C={self.C}, "
                f"{len(self.monomials)} monomials, {self.policy!r})")

    def to_json(self) -> dict:
        policy: dict = {"kind": type(self.policy).__name__}
        if isinstance(self.policy, AveragedUStat):
            policy.update(subsample=self.policy.subsample, seed=self.policy.seed)
        return {"poly": self.poly.to_json(), "policy": policy}

    @classmethod
    def from_json(cls, obj: dict) -> "CompiledEstimator":
        p = obj.get("policy", {})
        if p.get("kind") == "FirstK":
            policy: Policy = FirstK()
        else:
            policy = AveragedUStat(subsample=p.get("subsample"), seed=p.get("seed", 0))
        return cls(MultiPoly.from_json(obj["poly"]), policy)


def compile_ube(poly: MultiPoly, policy: Policy = DEFAULT_POLICY) -> CompiledEstimator:
    """Compile a polynomial MI into an unbiased estimator needing degree-many
    samples.  Constant polynomials compile to the constant estimator."""
    return CompiledEstimator(poly, policy)


def _pairs(batch) -> list[tuple[int, int]]:
    return batch.pairs if isinstance(batch, SampleBatch) else list(batch)


def evaluate_ube(est: CompiledEstimator, batch):
    """Apply the estimator to a batch of at least est.d report pairs.
    Exact rational output for FirstK and exact/subsampled U-statistics."""
    pairs = _pairs(batch)
    T = len(pairs)
    if T < est.d:
        raise PreconditionError(
            f"estimator of degree {est.d} needs at least {est.d} samples, got {T}")
    if isinstance(est.policy, FirstK):
        total = Fraction(0)
        for mono in est.monomials:
            if all(pairs[k] == f for k, f in enumerate(mono.factors)):
                total += mono.coef
        return total
    if est.policy.subsample is None:
        counts = Counter(pairs)
        return _eval_counts(est, counts, T)
    # subsampled ordered subsets, deterministic in the policy seed
    rng = np.random.default_rng(est.policy.seed)
    total = Fraction(0)
    m = est.policy.subsample
    if m <= 0:
        raise ConfigurationError("subsample count must be positive")
    for mono in est.monomials:
        k = len(mono.factors)
        if k == 0:
            total += mono.coef
            continue
        hits = 0
        for _ in range(m):
            idx = rng.choice(T, size=k, replace=False)
            if all(pairs[i] == f for i, f in zip(idx, mono.factors)):
                hits += 1
        total += mono.coef * Fraction(hits, m)
    return total


def _eval_counts(est: CompiledEstimator, counts, T: int):
    """Exact ordered-subset average via falling-factorial counting: the
    number of injective assignments of factors to samples matching all
    indicators is prod_j (n_j)_(m_j), out of (T)_k ordered k-subsets."""
    total = Fraction(0)
    for mono in est.monomials:
        k = len(mono.factors)
        if k == 0:
            total += mono.coef
            continue
        num = 1
        for pair, mult in mono.counts:
            num *= _falling(counts.get(pair, 0), mult)
            if num == 0:
                break
        if num:
            total += mono.coef * Fraction(num, _falling(T, k))
    return total


def exact_expectation(est: CompiledEstimator, U: JointDistribution, T: int,
                      cap: int = 10 ** 6):
    """Brute-force expectation of the estimator under T i.i.d. samples of U:
    sum over all (C^2)^T outcome sequences of its probability times the
    estimator value.  Exact rationals throughout."""
    C = est.C
    if U.C != C:
        raise PreconditionError("alphabet mismatch")
    if T < est.d:
        raise PreconditionError(f"T={T} below estimator degree {est.d}")
    n_out = (C * C) ** T
    if n_out > cap:
        raise PreconditionError(f"{n_out} outcomes exceed enumeration cap {cap}")
    probs = [to_exact(v) for row in U.entries for v in row]
    symbols = [(s // C, s % C) for s in range(C * C)]
    support = [s for s in range(C * C) if probs[s] != 0]
    total = Fraction(0)
    for seq in itertools.product(support, repeat=T):
        p = Fraction(1)
        for s in seq:
            p *= probs[s]
        batch = [symbols[s] for s in seq]
        total += p * evaluate_ube(est, batch)
    return total
