"""Effort-incentive optimization over dominantly truthful payment schemes.

The model: full-effort signals follow U_G; each agent picks an effort strategy
from a finite set, realized as column-stochastic intrinsic noise N with cost
e(N); the realized joint is N_A U_G N_B^T.  The requester's utility is her
value for that joint minus her payments.  Since every payment scheme here is
backed by a dominantly truthful measure, reports are truthful once efforts
are fixed, and the game is the finite effort game.

Pipeline: compute the first-best v*, pay it with threshold payments (almost
optimal, utility v* - 2 eps), then approximate the threshold indicator by a
sweep of Dirichlet-density VMI measures whose concentration alpha grows.
All arithmetic is exact rational so the equilibrium comparisons are
certificates.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .core import (ColumnStochasticMatrix, JointDistribution,
                   _exact_det, _exact_inverse, find_degrading_matrix,
                   is_less_informative, same_slice)
from .errors import ConfigurationError, PreconditionError
from .measures import MeasureSpec
from .rational import parse_number, to_exact
from .vmi import DensitySpec, VmiClosedForm, vmi_symbolic


def _exact_matrix(rows) -> list[list[Fraction]]:
    return [[to_exact(parse_number(v, exact=True)) if isinstance(v, str)
             else _dec(v) for v in row] for row in rows]


def _dec(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def _mm(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]


def _tr(a):
    return [list(row) for row in zip(*a)]


@dataclass(frozen=True)
class EffortStrategy:
    """An effort level: intrinsic noise matrix plus its cost."""

    noise: ColumnStochasticMatrix
    cost: Fraction


class EffortModel:
    """Finite effort game: U_G, per-agent strategy sets, and a value table.

    ``values[(ia, ib)]`` is the requester's value for the joint induced by
    strategy pair (ia, ib); unlisted pairs are worth 0 (the convention for
    fully noisy pairs).  Construction validates the monotonicity assumption:
    less informative noise never costs more, less informative joints are
    never worth more.

    ``value_hook`` / effort hooks extend the tables to off-table matrices
    (needed for substituted-threshold slack checks).  The defaults assign the
    smallest table value/cost among strictly more informative table entries,
    the tightest extension consistent with monotonicity and continuity.
    """

    def __init__(self, U_G: JointDistribution, alice: list[EffortStrategy],
                 bob: list[EffortStrategy], values: dict,
                 value_hook=None, effort_hook_alice=None, effort_hook_bob=None,
                 check_monotonicity: bool = True):
        if not alice or not bob:
            raise ConfigurationError("each agent needs at least one strategy")
        self.U_G = U_G.as_exact()
        self.alice = list(alice)
        self.bob = list(bob)
        self.values = {k: _dec(v) for k, v in values.items()}
        self.value_hook = value_hook
        self.effort_hook_alice = effort_hook_alice
        self.effort_hook_bob = effort_hook_bob
        self._joints: dict = {}
        if any(s.cost < 0 for s in self.alice + self.bob):
            raise ConfigurationError("efforts must be nonnegative")
        if any(v < 0 for v in self.values.values()):
            raise ConfigurationError("values must be nonnegative")
        if check_monotonicity:
            self._check_assumptions()

    @property
    def C(self) -> int:
        return self.U_G.C

    def joint(self, ia: int, ib: int) -> JointDistribution:
        """The induced joint N_A U_G N_B^T (exact, cached)."""
        key = (ia, ib)
        if key not in self._joints:
            na = self.alice[ia].noise.exact_entries().tolist()
            nb = self.bob[ib].noise.exact_entries().tolist()
            ug = self.U_G.exact_entries().tolist()
            self._joints[key] = JointDistribution(_mm(_mm(na, ug), _tr(nb)))
        return self._joints[key]

    def value(self, ia: int, ib: int) -> Fraction:
        return self.values.get((ia, ib), Fraction(0))

    def _check_assumptions(self):
        for side in (self.alice, self.bob):
            for i, si in enumerate(side):
                for k, sk in enumerate(side):
                    if i != k and is_less_informative(si.noise, sk.noise) \
                            and si.cost > sk.cost:
                        raise ConfigurationError(
                            f"effort monotonicity violated: strategy {i} is less "
                            f"informative than {k} but costs more")
        pairs = list(product(range(len(self.alice)), range(len(self.bob))))
        for p in pairs:
            for q in pairs:
                if p == q:
                    continue
                jp, jq = self.joint(*p), self.joint(*q)
                if (is_less_informative(jp, jq)
                        or is_less_informative(jp.transpose(), jq.transpose())) \
                        and self.value(*p) > self.value(*q):
                    raise ConfigurationError(
                        f"value monotonicity violated between pairs {p} and {q}")

    # -- off-table extensions -------------------------------------------------

    def value_at(self, U: JointDistribution) -> Fraction:
        """Value of an arbitrary joint.  Default: the smallest table value
        among table joints above U (either side of the order); 0 if none."""
        if self.value_hook is not None:
            return _dec(self.value_hook(U))
        candidates = []
        for (ia, ib), v in _full_value_table(self).items():
            J = self.joint(ia, ib)
            if is_less_informative(U, J) or \
                    is_less_informative(U.transpose(), J.transpose()):
                candidates.append(v)
        return min(candidates) if candidates else Fraction(0)

    def effort_at(self, side: str, N: ColumnStochasticMatrix) -> Fraction:
        """Cost of an arbitrary noise matrix.  Default: the smallest cost of
        a table strategy dominating N (the nearest strategy it degrades)."""
        hook = self.effort_hook_alice if side == "alice" else self.effort_hook_bob
        if hook is not None:
            return _dec(hook(N))
        table = self.alice if side == "alice" else self.bob
        candidates = [s.cost for s in table if is_less_informative(N, s.noise)]
        return min(candidates) if candidates else max(s.cost for s in table)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        vals = [[float(self.value(ia, ib)) for ib in range(len(self.bob))]
                for ia in range(len(self.alice))]
        return {"U_G": self.U_G.to_json(),
                "alice": [{"N": s.noise.to_json()["rows"], "cost": float(s.cost)}
                          for s in self.alice],
                "bob": [{"N": s.noise.to_json()["rows"], "cost": float(s.cost)}
                        for s in self.bob],
                "values": vals}

    @classmethod
    def from_json(cls, obj: dict) -> "EffortModel":
        try:
            U_G = JointDistribution.from_json(obj["U_G"], exact=True)
            def side(key):
                return [EffortStrategy(
                    ColumnStochasticMatrix(_exact_matrix(s["N"])),
                    _dec(parse_number(s.get("cost", 0), exact=True)))
                    for s in obj[key]]
            alice, bob = side("alice"), side("bob")
            values = {}
            for ia, row in enumerate(obj.get("values", [])):
                for ib, v in enumerate(row):
                    v = _dec(parse_number(v, exact=True))
                    if v != 0:
                        values[(ia, ib)] = v
            return cls(U_G, alice, bob, values)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad effort-model JSON: {exc}") from exc


def _full_value_table(model: EffortModel) -> dict:
    out = {}
    for ia in range(len(model.alice)):
        for ib in range(len(model.bob)):
            out[(ia, ib)] = model.value(ia, ib)
    return out


def example_effort_model() -> EffortModel:
    """The canonical two-by-three illustration: full noise is free, one-sided
    noise costs 1, two-sided costs 10; values 15 and 50.  U_G is not pinned
    down by those numbers; diag(.5,.5) is the documented default (v* is
    U_G-independent, the induced threshold matrix is not)."""
    h = Fraction(1, 2)
    U_G = JointDistribution([[h, 0], [0, h]])
    n0 = ColumnStochasticMatrix([[h, h], [h, h]])
    n1 = ColumnStochasticMatrix([[1, Fraction(2, 5)], [0, Fraction(3, 5)]])
    n2 = ColumnStochasticMatrix([[Fraction(4, 5), Fraction(1, 5)],
                                 [Fraction(1, 5), Fraction(4, 5)]])
    alice = [EffortStrategy(n0, Fraction(0)), EffortStrategy(n1, Fraction(1)),
             EffortStrategy(n2, Fraction(10))]
    bob = [EffortStrategy(n0, Fraction(0)), EffortStrategy(n1, Fraction(1))]
    values = {(1, 1): Fraction(15), (2, 1): Fraction(50)}
    return EffortModel(U_G, alice, bob, values)


# ---------------------------------------------------------------------------
# payment schemes


@dataclass
class PaymentScheme:
    """Expected-payment functions for both agents.

    threshold: P_A(U) = level_a * 1(U >= U*), P_B(U) = level_b * 1(U^T >= U*^T).
    measure:   P_A(U) = scale_a * M_A(U),     P_B(U) = scale_b * M_B(U^T).
    """

    kind: str
    ustar: JointDistribution | None = None
    level_a: Fraction = Fraction(0)
    level_b: Fraction = Fraction(0)
    measure_a: MeasureSpec | None = None
    measure_b: MeasureSpec | None = None
    scale_a: Fraction = Fraction(1)
    scale_b: Fraction = Fraction(1)

    @classmethod
    def threshold(cls, ustar: JointDistribution, level_a, level_b) -> "PaymentScheme":
        level_a, level_b = _dec(level_a), _dec(level_b)
        if level_a <= 0 or level_b <= 0:
            raise PreconditionError("threshold levels must be strictly positive")
        return cls("threshold", ustar=ustar, level_a=level_a, level_b=level_b)

    @classmethod
    def measure_backed(cls, measure_a: MeasureSpec, scale_a,
                       measure_b: MeasureSpec, scale_b) -> "PaymentScheme":
        if _dec(scale_a) <= 0 or _dec(scale_b) <= 0:
            raise PreconditionError("payment scales must be strictly positive")
        return cls("measure", measure_a=measure_a, measure_b=measure_b,
                   scale_a=_dec(scale_a), scale_b=_dec(scale_b))

    def pay_alice(self, U: JointDistribution) -> Fraction:
        if self.kind == "threshold":
            return self.level_a * int(is_less_informative(self.ustar, U))
        return self.scale_a * to_exact(self.measure_a.evaluate(U))

    def pay_bob(self, U: JointDistribution) -> Fraction:
        if self.kind == "threshold":
            return self.level_b * int(
                is_less_informative(self.ustar.transpose(), U.transpose()))
        return self.scale_b * to_exact(self.measure_b.evaluate(U.transpose()))


# ---------------------------------------------------------------------------
# first-best and threshold payments


@dataclass(frozen=True)
class VStarResult:
    vstar: Fraction
    alice_index: int
    bob_index: int
    ustar: JointDistribution
    degenerate: bool


def compute_vstar(model: EffortModel) -> VStarResult:
    """Exhaustively maximize v(joint) - e_A - e_B over the finite strategy
    product.  Ties break toward lower total cost, then lexicographic index."""
    best = None
    for ia in range(len(model.alice)):
        for ib in range(len(model.bob)):
            surplus = model.value(ia, ib) - model.alice[ia].cost - model.bob[ib].cost
            total_cost = model.alice[ia].cost + model.bob[ib].cost
            key = (-surplus, total_cost, ia, ib)
            if best is None or key < best[0]:
                best = (key, ia, ib, surplus)
    _, ia, ib, surplus = best
    ustar = model.joint(ia, ib)
    return VStarResult(vstar=surplus, alice_index=ia, bob_index=ib, ustar=ustar,
                       degenerate=ustar.det() == 0)


def threshold_payments(model: EffortModel, eps) -> PaymentScheme:
    """The almost-optimal scheme: pay each agent their optimal-pair effort
    plus eps iff the realized joint clears the threshold U* on their side."""
    eps = _dec(eps)
    if eps <= 0:
        raise PreconditionError("eps must be strictly positive (participation)")
    vs = compute_vstar(model)
    if vs.degenerate:
        raise PreconditionError("threshold payments need a non-degenerate U*")
    return PaymentScheme.threshold(
        vs.ustar,
        model.alice[vs.alice_index].cost + eps,
        model.bob[vs.bob_index].cost + eps)


# ---------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class EquilibriumCandidate:
    alice_index: int
    bob_index: int
    utility_alice: Fraction
    utility_bob: Fraction
    requester_utility: Fraction


def find_equilibria(model: EffortModel, scheme: PaymentScheme,
                    delta=0) -> list[EquilibriumCandidate]:
    """Brute-force delta-equilibria of the effort game: a pair survives iff
    neither agent can gain more than delta by a unilateral deviation.
    Utilities are expected payments minus costs (truthful reporting assumed:
    the schemes are dominantly truthful)."""
    delta = _dec(delta)
    if delta < 0:
        raise PreconditionError("delta must be nonnegative")
    na, nb = len(model.alice), len(model.bob)
    pay_a = {(ia, ib): scheme.pay_alice(model.joint(ia, ib))
             for ia in range(na) for ib in range(nb)}
    pay_b = {(ia, ib): scheme.pay_bob(model.joint(ia, ib))
             for ia in range(na) for ib in range(nb)}
    util_a = {(ia, ib): pay_a[(ia, ib)] - model.alice[ia].cost
              for ia in range(na) for ib in range(nb)}
    util_b = {(ia, ib): pay_b[(ia, ib)] - model.bob[ib].cost
              for ia in range(na) for ib in range(nb)}
    out = []
    for ia in range(na):
        for ib in range(nb):
            best_a = max(util_a[(k, ib)] for k in range(na))
            best_b = max(util_b[(ia, k)] for k in range(nb))
            if best_a - util_a[(ia, ib)] > delta:
                continue
            if best_b - util_b[(ia, ib)] > delta:
                continue
            requester = model.value(ia, ib) - pay_a[(ia, ib)] - pay_b[(ia, ib)]
            out.append(EquilibriumCandidate(ia, ib, util_a[(ia, ib)],
                                            util_b[(ia, ib)], requester))
    return out


@dataclass(frozen=True)
class EquilibriumSelection:
    chosen: EquilibriumCandidate
    requester_guarantee: Fraction
    tied: tuple


def select_equilibrium(candidates: list[EquilibriumCandidate]) -> EquilibriumSelection:
    """Agents coordinate on the equilibrium maximizing min(u_A, u_B); the
    requester's guaranteed utility is the minimum over the tied set (we report
    the guarantee, the designer maximized it upstream).  Deterministic
    tie-break by index for the 'chosen' field."""
    if not candidates:
        raise PreconditionError("no equilibrium candidates")
    best = max(min(c.utility_alice, c.utility_bob) for c in candidates)
    tied = [c for c in candidates
            if min(c.utility_alice, c.utility_bob) == best]
    tied.sort(key=lambda c: (c.alice_index, c.bob_index))
    guarantee = min(c.requester_utility for c in tied)
    return EquilibriumSelection(chosen=tied[0], requester_guarantee=guarantee,
                                tied=tuple(tied))


# ---------------------------------------------------------------------------
# substituted threshold and the Dirichlet approximation sweep


@dataclass(frozen=True)
class SubstitutedThreshold:
    side: str
    ustar_sub: JointDistribution      # on the slice of the side's threshold
    noise_sub: ColumnStochasticMatrix
    gamma: Fraction | None            # None when produced by grid snapping
    margin: Fraction                  # min entry of the degrading witness


def _side_context(model: EffortModel, vs: VStarResult, side: str):
    """(threshold matrix W, fixed factor M, star strategy, cost*) per side.
    Alice's order is the plain left order on U; Bob's is the left order on
    U^T, with M the transposed fixed factor."""
    ug = model.U_G.exact_entries().tolist()
    if side == "alice":
        nb = model.bob[vs.bob_index].noise.exact_entries().tolist()
        M = _mm(ug, _tr(nb))
        W = vs.ustar
        star = model.alice[vs.alice_index]
    else:
        na = model.alice[vs.alice_index].noise.exact_entries().tolist()
        M = _mm(_tr(ug), _tr(na))
        W = vs.ustar.transpose()
        star = model.bob[vs.bob_index]
    return W, M, star


def _inverse(m):
    inv = _exact_inverse(m)
    if inv is None:
        raise PreconditionError("matrix unexpectedly singular")
    return inv


def _feasible_substitute(model: EffortModel, vs: VStarResult, side: str,
                         eps: Fraction, V: list[list[Fraction]],
                         margin_min: Fraction):
    """Validate a candidate substituted threshold V (on W's slice): strictly
    below W with interior margin, non-degenerate, and value/effort slack
    within eps under the model's extension hooks.  Returns the
    SubstitutedThreshold or None."""
    W, M, star = _side_context(model, vs, side)
    try:
        cand = JointDistribution(V)
    except ConfigurationError:
        return None
    if _exact_det(V) == 0:
        return None
    witness = find_degrading_matrix(cand, W)
    if witness is None:
        return None
    margin = min(to_exact(x) for row in witness.entries for x in row)
    if margin < margin_min:
        return None
    if is_less_informative(W, cand):     # must be strictly below
        return None
    n_sub_rows = _mm(V, _inverse(M))
    try:
        n_sub = ColumnStochasticMatrix(n_sub_rows)
    except ConfigurationError:
        return None
    vstar_value = model.value(vs.alice_index, vs.bob_index)
    joint_view = cand if side == "alice" else cand.transpose()
    if model.value_at(joint_view) < vstar_value - eps:
        return None
    if model.effort_at(side, n_sub) < star.cost - eps:
        return None
    return SubstitutedThreshold(side=side, ustar_sub=cand, noise_sub=n_sub,
                                gamma=None, margin=margin)


_GAMMA_GRID = [Fraction(1, 2 ** k) for k in range(4, 21)]


def substituted_threshold(model: EffortModel, eps, side: str = "alice",
                          margin_min: Fraction = Fraction(1, 64)
                          ) -> SubstitutedThreshold:
    """Mix the optimal noise toward uniform, N' = (1-gamma) N* + gamma/C,
    taking the first feasible gamma on the halving grid {1/16, 1/32, ...}:
    the mixed threshold must sit strictly inside the lower set of U* (margin
    at least ``margin_min``) while giving up at most eps of value and effort
    under the model's extension hooks."""
    eps = _dec(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    vs = compute_vstar(model)
    if vs.degenerate:
        raise PreconditionError("substituted threshold needs non-degenerate U*")
    W, M, star = _side_context(model, vs, side)
    C = model.C
    n_star = star.noise.exact_entries().tolist()
    for gamma in _GAMMA_GRID:
        mixed = [[(1 - gamma) * n_star[i][j] + gamma / C for j in range(C)]
                 for i in range(C)]
        V = _mm(mixed, M)
        found = _feasible_substitute(model, vs, side, eps, V, margin_min)
        if found is not None:
            return SubstitutedThreshold(side=side, ustar_sub=found.ustar_sub,
                                        noise_sub=found.noise_sub, gamma=gamma,
                                        margin=found.margin)
    raise PreconditionError(f"no feasible gamma on the grid for side {side!r}")


def _compositions(total: int, parts: int):
    """All length-``parts`` tuples of positive integers summing to total."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _snap_substitute(model: EffortModel, vs: VStarResult, side: str,
                     eps: Fraction, target: JointDistribution, grid: int,
                     margin_min: Fraction, per_column: int = 40
                     ) -> SubstitutedThreshold:
    """Re-derive the substituted threshold on the 1/grid rational lattice
    (so integer alpha-matrices exist for every alpha in the sweep): nearest
    feasible lattice point to the gamma-mixed target, columns snapped
    independently to preserve the slice."""
    W, _, _ = _side_context(model, vs, side)
    C = model.C
    t = target.exact_entries().tolist()
    col_candidates = []
    for j in range(C):
        col_total = sum(to_exact(W.entries[i][j]) for i in range(C)) * grid
        if col_total.denominator != 1:
            raise ConfigurationError(
                f"column sum {col_total / grid} is not on the 1/{grid} lattice")
        tgt = [t[i][j] * grid for i in range(C)]
        cands = sorted(_compositions(int(col_total), C),
                       key=lambda w: sum(abs(Fraction(x) - y)
                                         for x, y in zip(w, tgt)))
        col_candidates.append([(sum(abs(Fraction(x) - y) for x, y in zip(w, tgt)), w)
                               for w in cands[:per_column]])
    ranked = []
    for combo in product(*[range(len(c)) for c in col_candidates]):
        dist = sum(col_candidates[j][r][0] for j, r in enumerate(combo))
        ranked.append((dist, combo))
    ranked.sort(key=lambda it: (it[0], it[1]))
    for _, combo in ranked:
        V = [[Fraction(col_candidates[j][r][1][i], grid) for j, r in
              enumerate(combo)] for i in range(C)]
        found = _feasible_substitute(model, vs, side, eps, V, margin_min)
        if found is not None:
            return found
    raise PreconditionError(
        f"no feasible substituted threshold on the 1/{grid} lattice for {side!r}")


@dataclass
class SweepRow:
    alpha: int
    required_T: int
    vmi_at_ustar: float
    eq_a: int
    eq_b: int
    requester_utility: Fraction
    off_slice_value: float
    utility_alice: Fraction
    utility_bob: Fraction
    closed_form_a: VmiClosedForm
    closed_form_b: VmiClosedForm


@dataclass
class SweepResult:
    rows: list[SweepRow]
    ustar: JointDistribution
    sub_alice: SubstitutedThreshold
    sub_bob: SubstitutedThreshold
    vstar: Fraction
    probe: JointDistribution


def approximation_sweep(model: EffortModel, eps, delta, alphas,
                        calibrate_at_target: bool = True,
                        probe: JointDistribution | None = None,
                        margin_min: Fraction = Fraction(1, 64)) -> SweepResult:
    """Approximate the optimal threshold payments by Dirichlet-density VMI
    measures of growing concentration alpha.

    Per alpha: build densities centered at the substituted thresholds (Alice
    side and transposed Bob side), materialize the polynomial closed forms
    ((VMI)^2 for even C, VMI itself for odd C), wrap them into payment
    schemes, and solve the delta-equilibrium selection.  The substituted
    thresholds are snapped once to the 1/gcd(alphas) lattice so every
    alpha-matrix is integral and the density centers stay fixed across the
    sweep.

    ``calibrate_at_target`` scales each side by (e* + eps) / measure(U*), so
    the target pair is paid exactly e* + eps at every alpha; since the
    measure at U* converges to 1, this coincides with the constant scaling
    (e* + eps) in the limit, and it is what makes the guarantee v* - 4 eps
    observable at desk-scale alpha.
    """
    eps, delta = _dec(eps), _dec(delta)
    if not (delta > eps > 0):
        raise PreconditionError("need delta > eps > 0")
    alphas = sorted(int(a) for a in alphas)
    if not alphas or any(a <= 0 for a in alphas):
        raise PreconditionError("alphas must be positive integers")
    grid = math.gcd(*alphas) if len(alphas) > 1 else alphas[0]
    vs = compute_vstar(model)
    if vs.degenerate:
        raise PreconditionError("sweep needs non-degenerate U*")
    C = model.C

    subs = {}
    for side in ("alice", "bob"):
        line = substituted_threshold(model, eps, side, margin_min)
        subs[side] = _snap_substitute(model, vs, side, eps, line.ustar_sub,
                                      grid, margin_min)
    if probe is None:
        probe = model.U_G
        if same_slice(probe, vs.ustar) or probe.det() == 0:
            raise PreconditionError(
                "default off-slice probe unusable; pass one explicitly")
    mode = "squared" if C % 2 == 0 else "odd_direct"
    cost_a = model.alice[vs.alice_index].cost
    cost_b = model.bob[vs.bob_index].cost

    rows = []
    for alpha in alphas:
        dens_a = DensitySpec.dirichlet(subs["alice"].ustar_sub, alpha)
        dens_b = DensitySpec.dirichlet(subs["bob"].ustar_sub, alpha)
        cf_a = vmi_symbolic(dens_a, C, mode)
        cf_b = vmi_symbolic(dens_b, C, mode)
        q_a = to_exact(cf_a.value(vs.ustar))
        q_b = to_exact(cf_b.value(vs.ustar.transpose()))
        if q_a <= 0 or q_b <= 0:
            raise PreconditionError("measure vanishes at the target joint")
        scale_a = (cost_a + eps) / q_a if calibrate_at_target else cost_a + eps
        scale_b = (cost_b + eps) / q_b if calibrate_at_target else cost_b + eps
        scheme = PaymentScheme.measure_backed(
            MeasureSpec.vmi(cf_a), scale_a, MeasureSpec.vmi(cf_b), scale_b)
        selection = select_equilibrium(find_equilibria(model, scheme, delta))
        chosen = selection.chosen
        rows.append(SweepRow(
            alpha=alpha,
            required_T=cf_a.degree,
            vmi_at_ustar=cf_a.vmi_value(vs.ustar),
            eq_a=chosen.alice_index,
            eq_b=chosen.bob_index,
            requester_utility=selection.requester_guarantee,
            off_slice_value=cf_a.vmi_value(probe),
            utility_alice=chosen.utility_alice,
            utility_bob=chosen.utility_bob,
            closed_form_a=cf_a,
            closed_form_b=cf_b))
    return SweepResult(rows=rows, ustar=vs.ustar, sub_alice=subs["alice"],
                       sub_bob=subs["bob"], vstar=vs.vstar, probe=probe)


def sweep_rows_to_csv(result: SweepResult) -> str:
    lines = ["alpha,T,vmi_at_ustar,eq_a,eq_b,requester_utility"]
    for r in result.rows:
        lines.append(f"{r.alpha},{r.required_T},{r.vmi_at_ustar:.17g},"
                     f"{r.eq_a},{r.eq_b},{float(r.requester_utility):.17g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the determinant counterexample


@dataclass(frozen=True)
class DmiCounterexampleReport:
    cheap_pair: tuple
    rich_pair: tuple
    det_cheap: Fraction
    det_rich: Fraction
    dmi_payment_cheap: Fraction
    dmi_payment_rich: Fraction
    utility_cap: Fraction
    vstar: Fraction

    @property
    def dmi_suboptimal(self) -> bool:
        return self.utility_cap < self.vstar


def dmi_counterexample_check(model: EffortModel) -> DmiCounterexampleReport:
    """Exhibit why determinant-proportional payments cannot reach v*: two
    noise levels with equal |det| but different costs earn identical DMI
    payments, so the agent picks the cheap one, capping the requester at the
    cheap pair's surplus."""
    from .measures import dmi

    vs = compute_vstar(model)
    best = None
    for i in range(len(model.alice)):
        for k in range(len(model.alice)):
            if model.alice[i].cost >= model.alice[k].cost:
                continue
            di = abs(to_exact(model.alice[i].noise.det()))
            dk = abs(to_exact(model.alice[k].noise.det()))
            if di != dk or di == 0:
                continue
            for j in range(len(model.bob)):
                gap = model.value(k, j) - model.value(i, j)
                if gap > 0 and (best is None or gap > best[0]):
                    best = (gap, i, k, j)
    if best is None:
        raise PreconditionError(
            "model lacks two equal-determinant strategies with a value gap")
    _, i, k, j = best
    pay_cheap = to_exact(dmi(model.joint(i, j)))
    pay_rich = to_exact(dmi(model.joint(k, j)))
    cap = model.value(i, j) - model.alice[i].cost - model.bob[j].cost
    return DmiCounterexampleReport(
        cheap_pair=(i, j), rich_pair=(k, j),
        det_cheap=abs(to_exact(model.alice[i].noise.det())),
        det_rich=abs(to_exact(model.alice[k].noise.det())),
        dmi_payment_cheap=pay_cheap, dmi_payment_rich=pay_rich,
        utility_cap=cap, vstar=vs.vstar)
