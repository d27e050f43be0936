"""Executable multi-task peer prediction mechanisms and strategy audits.

Each agent pair (i, j) is scored by an unbiased estimator of a polynomial
mutual information applied to their joint report stream; an agent's payment
is the scaled sum over peers.  Because the measures are information-monotone
and vanish on independence, truthful reporting maximizes expected payment
(dominant truthfulness), which the audit verifies empirically by sweeping
strategies.  Payments may be negative on particular samples; clamping would
break unbiasedness, so none is applied.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import ColumnStochasticMatrix, JointDistribution, apply_strategies
from .errors import ConfigurationError, PreconditionError
from .estimators import (DEFAULT_POLICY, CompiledEstimator, FirstK, Policy,
                         compile_ube, evaluate_ube)
from .measures import MeasureSpec
from .polyalg import MultiPoly
from .rational import to_exact


@dataclass
class MechanismSpec:
    """A deployable mechanism: polynomial-backed measure, task count, factor
    assignment policy, payment scale, and participant count."""

    measure: MeasureSpec
    T: int
    policy: Policy = field(default_factory=lambda: DEFAULT_POLICY)
    scale: float | Fraction = 1
    n: int = 2
    shared_task_picks: bool = False  # one permutation for every pair

    def __post_init__(self):
        if not self.measure.is_polynomial_backed():
            raise ConfigurationError(
                "mechanisms need a polynomial-backed measure (unbiased estimation)")
        degree = self.measure.polynomial().degree()
        if self.T < degree:
            raise ConfigurationError(
                f"T={self.T} is below the measure's degree {degree}")
        if to_exact(self.scale) <= 0:
            raise ConfigurationError("payment scale must be positive")
        if self.n < 2:
            raise ConfigurationError("need at least two participants")

    def estimator(self) -> CompiledEstimator:
        return compile_ube(self.measure.polynomial(), self.policy)


@dataclass
class AgentProfile:
    """Report strategy (and optional upstream effort noise) of one agent."""

    strategy: ColumnStochasticMatrix
    effort_noise: ColumnStochasticMatrix | None = None

    def effective(self) -> ColumnStochasticMatrix:
        if self.effort_noise is None:
            return self.strategy
        from .core import _matmul
        return ColumnStochasticMatrix(
            _matmul(self.strategy.entries, self.effort_noise.entries))


@dataclass
class MechanismResult:
    payments: list
    pairwise: dict
    permutations: dict


def _pair_permutation(T: int, i: int, j: int, seed: int, shared: bool) -> np.ndarray:
    key = 0 if shared else (min(i, j) * 1000003 + max(i, j))
    rng = np.random.default_rng((seed, key))
    return rng.permutation(T)


def run_mechanism(spec: MechanismSpec, reports: list, seed: int = 0) -> MechanismResult:
    """Score every ordered agent pair and pay each agent the scaled sum over
    peers.  Task order is shuffled per (unordered) pair with a seeded
    permutation before estimator assignment; permutations are returned for
    auditability."""
    if len(reports) != spec.n:
        raise PreconditionError(f"expected {spec.n} report lists")
    if len(reports) < 2:
        raise PreconditionError("need at least two agents")
    lengths = {len(r) for r in reports}
    if len(lengths) != 1:
        raise PreconditionError("all agents must report on the same tasks")
    T = lengths.pop()
    if T < spec.T:
        raise PreconditionError(f"need at least {spec.T} tasks, got {T}")
    est = spec.estimator()
    streams = [(_pairs_of(r)) for r in reports]
    C = est.C
    if any(not 0 <= x < C for s in streams for x in s):
        raise PreconditionError(f"report symbol outside the alphabet 0..{C - 1}")
    scale = to_exact(spec.scale)
    pairwise: dict = {}
    perms: dict = {}
    for i in range(spec.n):
        for j in range(spec.n):
            if i == j:
                continue
            perm = _pair_permutation(T, i, j, seed, spec.shared_task_picks)
            perms[(i, j)] = perm.tolist()
            stream = [(streams[i][t], streams[j][t]) for t in perm]
            pairwise[(i, j)] = scale * evaluate_ube(est, stream)
    payments = [sum(pairwise[(i, j)] for j in range(spec.n) if j != i)
                for i in range(spec.n)]
    return MechanismResult(payments=payments, pairwise=pairwise, permutations=perms)


def _pairs_of(r):
    return [int(x) for x in r]


# ---------------------------------------------------------------------------
# the explicit 8-task binary mechanism


_VMI_STAR_CORE = (
    (Fraction(8, 15), ((0, 0), (0, 0), (0, 1), (0, 1))),
    (Fraction(4, 3), ((0, 1), (0, 0), (0, 0), (1, 1))),
    (Fraction(4, 9), ((0, 0), (0, 0), (1, 1), (1, 1))),
    (Fraction(4, 3), ((0, 0), (0, 1), (0, 1), (1, 0))),
    (Fraction(40, 9), ((0, 0), (0, 1), (1, 0), (1, 1))),
    (Fraction(4, 3), ((0, 0), (1, 0), (1, 1), (1, 1))),
    (Fraction(4, 9), ((0, 1), (0, 1), (1, 0), (1, 0))),
    (Fraction(4, 3), ((0, 1), (1, 0), (1, 0), (1, 1))),
    (Fraction(8, 15), ((1, 0), (1, 0), (1, 1), (1, 1))),
)


def vmi_star_payment(pair_reports, designated) -> Fraction:
    """The explicit 8-task binary payment p_ij, evaluated literally.

    ``pair_reports`` are (my answer, peer answer) pairs; ``designated`` are the
    eight task indices feeding the indicator events E_1..E_8.  Tasks 1-4 form
    the two determinant brackets, tasks 5-8 the degree-4 core with the printed
    coefficients 8/15, 4/3, 4/9, 40/9.
    """
    pairs = _as_binary_pairs(pair_reports)
    designated = list(designated)
    if len(designated) != 8:
        raise PreconditionError("exactly 8 designated tasks required")
    if any(not 0 <= t < len(pairs) for t in designated):
        raise PreconditionError("designated task index out of range")
    e = [pairs[t] for t in designated]

    def ind(t, c, cp):  # E_t(c, c') with t in 1..8
        return 1 if e[t - 1] == (c, cp) else 0

    det1 = ind(1, 0, 0) * ind(2, 1, 1) - ind(1, 0, 1) * ind(2, 1, 0)
    det2 = ind(3, 0, 0) * ind(4, 1, 1) - ind(3, 0, 1) * ind(4, 1, 0)
    core = Fraction(0)
    for coef, pattern in _VMI_STAR_CORE:
        hit = 1
        for t, (c, cp) in enumerate(pattern, start=5):
            hit &= ind(t, c, cp)
            if not hit:
                break
        if hit:
            core += coef
    return 2 * det1 * det2 * core


def _as_binary_pairs(pair_reports):
    pairs = [(int(a), int(b)) for a, b in pair_reports]
    if any(a not in (0, 1) or b not in (0, 1) for a, b in pairs):
        raise PreconditionError("the explicit mechanism is binary only")
    return pairs


def vmi_star_measure() -> MeasureSpec:
    """The degree-8 polynomial measure 2 det(U)^2 * (mountain core) that the
    explicit mechanism estimates."""
    from .vmi import DensitySpec, vmi_symbolic
    mountain = DensitySpec.polynomial(
        MultiPoly.monomial(4, (1, 1, 1, 1), 16), check_nonneg=False)
    return MeasureSpec.vmi(vmi_symbolic(mountain, 2, "even_times_dmi"),
                           label="vmi*")


# ---------------------------------------------------------------------------
# expectations, simulation, audits


def expected_payment(measure: MeasureSpec, S_A: ColumnStochasticMatrix,
                     U: JointDistribution, S_B: ColumnStochasticMatrix):
    """The measure at S_A U S_B^T: each agent's expected per-pair payment
    under consistent strategies (exact for polynomial measures in exact mode)."""
    return measure.evaluate(apply_strategies(U, S_A, S_B))


def _sample_reports(U: JointDistribution, profiles, T: int, replicates: int,
                    rng: np.random.Generator):
    """Vectorized sampling: signals ~ U i.i.d. per task, strategies applied
    independently per task.  Returns (a, b) int arrays (replicates, T)."""
    C = U.C
    probs = U.float_entries().reshape(-1)
    probs = probs / probs.sum()
    sym = rng.choice(C * C, size=(replicates, T), p=probs)
    sig_a, sig_b = sym // C, sym % C
    out = []
    for sig, prof in zip((sig_a, sig_b), profiles):
        S = prof.effective().float_entries()
        cdf = np.cumsum(S, axis=0)          # cdf[:, c] over reports
        u = rng.random(sig.shape)
        rep = (u[..., None] > cdf.T[sig]).sum(axis=-1)
        out.append(rep.astype(np.int64))
    return out


def _evaluate_batches(est: CompiledEstimator, a: np.ndarray, b: np.ndarray):
    """Vectorized estimator evaluation on (replicates, T) report arrays."""
    R, T = a.shape
    C = est.C
    values = np.zeros(R)
    if isinstance(est.policy, FirstK):
        for mono in est.monomials:
            if len(mono.factors) == 0:
                values += float(mono.coef)
                continue
            hit = np.ones(R, dtype=bool)
            for k, (c, cp) in enumerate(mono.factors):
                hit &= (a[:, k] == c) & (b[:, k] == cp)
            values += float(mono.coef) * hit
        return values
    if est.policy.subsample is None:
        sym = a * C + b
        counts = np.stack([(sym == s).sum(axis=1) for s in range(C * C)], axis=1)
        for mono in est.monomials:
            k = len(mono.factors)
            if k == 0:
                values += float(mono.coef)
                continue
            num = np.ones(R)
            for (c, cp), mult in mono.counts:
                n = counts[:, c * C + cp].astype(float)
                for step in range(mult):
                    num = num * np.maximum(n - step, 0.0)
            denom = 1.0
            for step in range(k):
                denom *= T - step
            values += float(mono.coef) * num / denom
        return values
    rng = np.random.default_rng(est.policy.seed)
    m = est.policy.subsample
    for mono in est.monomials:
        k = len(mono.factors)
        if k == 0:
            values += float(mono.coef)
            continue
        hits = np.zeros(R)
        for _ in range(m):
            idx = rng.choice(T, size=k, replace=False)
            hit = np.ones(R, dtype=bool)
            for pos, (c, cp) in zip(idx, mono.factors):
                hit &= (a[:, pos] == c) & (b[:, pos] == cp)
            hits += hit
        values += float(mono.coef) * hits / m
    return values


@dataclass
class SimulationResult:
    mean: list[float]
    stderr: list[float]
    expected: list
    replicates: int


def simulate(U: JointDistribution, profiles: list[AgentProfile],
             spec: MechanismSpec, replicates: int, seed: int) -> SimulationResult:
    """Monte-Carlo realization of the mechanism for two agents: sample T
    i.i.d. signal pairs per replicate, apply strategies, score both ways.
    Returns empirical means with standard errors plus the exact expected
    per-agent payments for cross-checking."""
    if replicates < 1:
        raise PreconditionError("replicates must be >= 1")
    if len(profiles) != 2:
        raise PreconditionError("the signal model is pairwise: two profiles")
    rng = np.random.default_rng(seed)
    a, b = _sample_reports(U, profiles, spec.T, replicates, rng)
    # fresh task shuffle per replicate (tasks are i.i.d., so this only
    # realizes the 'independent random orders' protocol step)
    order = np.argsort(rng.random(a.shape), axis=1)
    a = np.take_along_axis(a, order, axis=1)
    b = np.take_along_axis(b, order, axis=1)
    est = spec.estimator()
    scale = float(spec.scale)
    pay_a = scale * _evaluate_batches(est, a, b)
    pay_b = scale * _evaluate_batches(est, b, a)
    exp_a = to_exact(spec.scale) * to_exact(
        expected_payment(spec.measure, profiles[0].effective(), U,
                         profiles[1].effective()))
    exp_b = to_exact(spec.scale) * to_exact(
        expected_payment(spec.measure, profiles[1].effective(),
                         U.transpose(), profiles[0].effective()))
    return SimulationResult(
        mean=[float(pay_a.mean()), float(pay_b.mean())],
        stderr=[float(pay_a.std(ddof=1) / np.sqrt(replicates)),
                float(pay_b.std(ddof=1) / np.sqrt(replicates))],
        expected=[exp_a, exp_b],
        replicates=replicates)


@dataclass
class AuditViolation:
    kind: str
    strategy_index: int
    truthful_value: float
    deviated_value: float


@dataclass
class AuditReport:
    checked: int
    violations: list[AuditViolation]
    truthful_value: float
    uninformative_value: float
    positivity_gap_ok: bool

    @property
    def passed(self) -> bool:
        return not self.violations and self.positivity_gap_ok


def truthfulness_audit(measure: MeasureSpec, U: JointDistribution,
                       strategies: list[ColumnStochasticMatrix],
                       tol: float = 1e-9,
                       peer: ColumnStochasticMatrix | None = None) -> AuditReport:
    """Verify that no strategy in the set beats truth-telling:
    M(S U) <= M(U) + tol against a truthful peer, and M(S U P^T) <= M(U P^T)
    + tol against a fixed peer strategy P.  Additionally checks the strict
    positivity gap: uninformative strategies earn (essentially) zero while
    the truthful payment is positive whenever M(U) > 0."""
    C = U.C
    identity = ColumnStochasticMatrix.identity(C, exact=U.exact)
    if not any(S.allclose(identity) for S in strategies):
        raise PreconditionError("the strategy set must include the identity")
    peer = peer if peer is not None else identity
    base = float(measure.evaluate(U))
    base_peer = float(measure.evaluate(apply_strategies(U, identity, peer)))
    violations = []
    for idx, S in enumerate(strategies):
        v = float(measure.evaluate(apply_strategies(U, S, identity)))
        if v > base + tol:
            violations.append(AuditViolation("truthful-peer", idx, base, v))
        vp = float(measure.evaluate(apply_strategies(U, S, peer)))
        if vp > base_peer + tol:
            violations.append(AuditViolation("fixed-peer", idx, base_peer, vp))
    uninf = ColumnStochasticMatrix.uniform(C, exact=U.exact)
    uninf_value = float(measure.evaluate(apply_strategies(U, uninf, identity)))
    gap_ok = True
    if base > tol:
        gap_ok = uninf_value <= tol and base > uninf_value
    return AuditReport(checked=len(strategies), violations=violations,
                       truthful_value=base, uninformative_value=uninf_value,
                       positivity_gap_ok=gap_ok)
