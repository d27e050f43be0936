import math
from fractions import Fraction as F

import numpy as np
import pytest

from volmi.core import (JointDistribution, left_multiply, random_joint,
                        random_rational_joint, random_rational_stochastic)
from volmi.errors import ConfigurationError, PreconditionError
from volmi.polyalg import MultiPoly, det_poly
from volmi.vmi import (DensitySpec, VmiClosedForm, convergence_probe,
                       dirichlet_density, interior_margin, sample_slice,
                       slice_volume, threshold_indicator, vmi_numeric,
                       vmi_symbolic)

H = F(1, 2)
DIAG = JointDistribution([[H, 0], [0, H]])
USTAR = JointDistribution([[F(1, 5), F(1, 10)], [F(3, 10), F(2, 5)]])


def mountain():
    return DensitySpec.polynomial(MultiPoly.monomial(4, (1, 1, 1, 1), 16))


def basin():
    a, b = MultiPoly.variable(4, 0), MultiPoly.variable(4, 1)
    q = MultiPoly.constant(4, F(1, 4))
    return DensitySpec.polynomial(((a - q) ** 2 + (b - q) ** 2).scale(3))


# -- closed forms -------------------------------------------------------------


MOUNTAIN_INNER = MultiPoly.from_text(
    "8/15 * u00^2*u01^2 + 4/3 * u00^2*u01*u11 + 4/9 * u00^2*u11^2"
    " + 4/3 * u00*u01^2*u10 + 40/9 * u00*u01*u10*u11 + 4/3 * u00*u10*u11^2"
    " + 4/9 * u01^2*u10^2 + 4/3 * u01*u10^2*u11 + 8/15 * u10^2*u11^2", 4)

BASIN_INNER = MultiPoly.from_text(
    "u00^2 + 3/2 * u00*u10 + u01^2 + 3/2 * u01*u11 + u10^2 + u11^2 - 3/8", 4)


def test_mountain_closed_form_coefficients():
    cf = vmi_symbolic(mountain(), 2, "even_times_dmi")
    assert cf.inner == MOUNTAIN_INNER
    assert cf.poly == (det_poly(2) ** 2 * MOUNTAIN_INNER).scale(2)
    assert cf.degree == 8 and cf.radical_pow == 0 and cf.estimable


def test_plain_closed_form():
    cf = vmi_symbolic(DensitySpec.uniform(), 2, "even_times_dmi")
    assert cf.inner == MultiPoly.constant(4, 1)
    assert cf.poly == (det_poly(2) ** 2).scale(2)


def test_basin_closed_form_coefficients():
    cf = vmi_symbolic(basin(), 2, "even_times_dmi")
    assert cf.inner == BASIN_INNER
    assert cf.degree == 6


def test_vmi_star_value():
    cf = vmi_symbolic(mountain(), 2, "even_times_dmi")
    assert cf.value(DIAG) == F(1, 288)


def test_uniform_density_law():
    # C = 2: VMI = 2 |det U|; C = 3: VMI = 3^{3/2}/8 det(U)^2
    cf2 = vmi_symbolic(DensitySpec.uniform(), 2, "squared")
    for seed in range(20):
        U = random_joint(2, seed)
        assert math.sqrt(float(cf2.value(U))) == pytest.approx(
            2 * abs(U.det()), abs=1e-8)
    cf3 = vmi_symbolic(DensitySpec.uniform(), 3, "odd_direct")
    assert cf3.poly == (det_poly(3) ** 2).scale(F(3, 8))
    assert cf3.radical_pow == 1
    for seed in range(20):
        U = random_joint(3, seed)
        assert cf3.value(U) == pytest.approx(3 ** 1.5 / 8 * U.det() ** 2, abs=1e-8)


def test_mode_parity_rules():
    with pytest.raises(PreconditionError):
        vmi_symbolic(DensitySpec.uniform(), 2, "odd_direct")
    with pytest.raises(ConfigurationError):
        vmi_symbolic(DensitySpec.uniform(), 2, "nonsense")
    # odd C with the extra det factor is |poly|-valued hence not estimable
    cf = vmi_symbolic(DensitySpec.uniform(), 3, "even_times_dmi")
    assert not cf.estimable
    U = random_joint(3, 1)
    assert cf.value(U) >= 0


def test_degree_bookkeeping():
    rng = np.random.default_rng(1)
    for seed in range(20):
        terms = {}
        for _ in range(3):
            exps = tuple(int(e) for e in rng.integers(0, 2, size=4))
            terms[exps] = F(int(rng.integers(1, 5)))
        dens = DensitySpec.polynomial(MultiPoly(4, terms), check_nonneg=False)
        d_w = dens.poly.degree()
        cf = vmi_symbolic(dens, 2, "squared", fold_simplex=False)
        assert cf.degree == cf.poly.degree() == 2 * (d_w + 2)
        cfd = vmi_symbolic(dens, 2, "even_times_dmi", fold_simplex=False)
        assert cfd.degree == d_w + 4


def test_symbolic_matches_numeric_random_densities():
    rng = np.random.default_rng(5)
    for trial in range(20):
        terms = {}
        for _ in range(int(rng.integers(1, 4))):
            exps = tuple(int(e) for e in rng.integers(0, 2, size=4))
            terms[exps] = F(int(rng.integers(1, 7)))  # positive: nonneg density
        dens = DensitySpec.polynomial(MultiPoly(4, terms), check_nonneg=False)
        cf = vmi_symbolic(dens, 2, "squared")
        for useed in range(20):
            U = random_joint(2, 100 * trial + useed)
            num, _ = vmi_numeric(dens, U)
            sym = cf.vmi_value(U)
            assert num == pytest.approx(sym, abs=1e-8)


def test_numeric_examples():
    num, _ = vmi_numeric(mountain(), DIAG)
    assert num == pytest.approx(1 / 72, abs=1e-12)
    num, _ = vmi_numeric(basin(), DIAG)
    assert num == pytest.approx(1 / 16, abs=1e-12)
    prod = random_joint(2, 3).marginal_product()
    num, _ = vmi_numeric(mountain(), prod)
    assert num == pytest.approx(0, abs=1e-12)
    with pytest.raises(PreconditionError):
        vmi_numeric(mountain(), DIAG, budget=0)


def test_numeric_monte_carlo_c3():
    # C = 3 Monte Carlo against the exact uniform law
    U = random_joint(3, 7)
    num, se = vmi_numeric(DensitySpec.uniform(), U, budget=200_000, seed=1)
    exact = 3 ** 1.5 / 8 * U.det() ** 2
    assert abs(num - exact) <= max(4 * se, 1e-9)


def test_evaluator_density():
    ev = DensitySpec.evaluator(lambda m: 1.0)
    num, _ = vmi_numeric(ev, DIAG)
    assert num == pytest.approx(2 * 0.25, abs=1e-10)


def test_numeric_budget_exhaustion_still_reports():
    # a budget too small for the doubling to converge: the estimate and the
    # last successive difference are still returned
    dens = DensitySpec.dirichlet(USTAR, 60, validate=False)
    val, err = vmi_numeric(dens, JointDistribution(
        [[F(7, 20), F(1, 20)], [F(3, 20), F(9, 20)]]), budget=5000)
    assert 0 <= val <= 1.5 and err >= 0


def test_polynomial_density_nonneg_rejection():
    neg = MultiPoly(4, {(1, 0, 0, 0): F(1), (0, 0, 0, 0): F(-1, 2)})
    with pytest.raises(ConfigurationError):
        DensitySpec.polynomial(neg)


def test_monotonicity_of_produced_vmi():
    forms = [vmi_symbolic(mountain(), 2, "even_times_dmi"),
             vmi_symbolic(basin(), 2, "squared"),
             vmi_symbolic(DensitySpec.dirichlet(USTAR, 10, validate=False), 2,
                          "squared")]
    for seed in range(500):
        U = random_rational_joint(2, seed)
        T = random_rational_stochastic(2, 40_000 + seed)
        TU = left_multiply(T, U)
        for cf in forms:
            assert cf.value(TU) <= cf.value(U)   # exact rational comparison


def test_vanishes_on_product_distributions():
    forms = [vmi_symbolic(mountain(), 2, "even_times_dmi"),
             vmi_symbolic(DensitySpec.uniform(), 2, "squared")]
    for seed in range(50):
        P = random_rational_joint(2, seed).marginal_product()
        for cf in forms:
            assert cf.value(P) == 0


# -- dirichlet family ---------------------------------------------------------


def test_dirichlet_normalization_validated():
    dens = dirichlet_density(USTAR, 20)   # validates at construction
    est, se = dens.validate_normalization(seed=99, samples=40_000)
    assert abs(est - 1) <= 3 * se
    # a deliberately broken constant must be caught
    broken = DensitySpec("dirichlet", alpha_matrix=dens.alpha_matrix,
                         ustar=dens.ustar, alpha=dens.alpha,
                         norm_rational=dens.norm_rational,
                         norm_log=dens.norm_log + math.log(2.0))
    with pytest.raises(ConfigurationError):
        broken.validate_normalization()


def test_dirichlet_rejects_bad_targets():
    with pytest.raises(PreconditionError):
        DensitySpec.dirichlet(DIAG, 10)          # zero entries
    with pytest.raises(PreconditionError):
        DensitySpec.dirichlet(USTAR, 0)


def test_dirichlet_column_moments_oracle():
    # Fact: column restriction is Dirichlet with mean ustar_col / colsum and
    # variance mean(1-mean)/(alpha_j + 1) -> 0 as alpha grows
    alpha = 40
    dens = DensitySpec.dirichlet(USTAR, alpha, validate=False)
    rng = np.random.default_rng(4)
    n = 200_000
    for j in range(2):
        mean, var = dens.column_restriction_moments(j)
        col = np.asarray([float(dens.alpha_matrix[i][j]) for i in range(2)])
        samples = rng.dirichlet(col, size=n)
        for i in range(2):
            assert samples[:, i].mean() == pytest.approx(float(mean[i]), abs=5e-3)
            assert samples[:, i].var() == pytest.approx(float(var[i]), rel=5e-2)
        assert float(mean[0]) == pytest.approx(
            float(USTAR.entries[0][j] / USTAR.column_sums()[j]))
    big = DensitySpec.dirichlet(USTAR, 100_000, validate=False)
    for j in range(2):
        _, var = big.column_restriction_moments(j)
        assert max(float(v) for v in var) < 1e-4


def test_dirichlet_polynomial_materialization():
    dens = DensitySpec.dirichlet(USTAR, 20, validate=False)
    poly, halfpow = dens.polynomial_form(2)
    assert poly.degree() == 20 - 4 and halfpow == -2
    assert dens.degree() == 16
    # non-integer alpha matrices have no polynomial form
    frac = DensitySpec.dirichlet(USTAR, F(25, 2), validate=False)
    with pytest.raises(PreconditionError):
        frac.polynomial_form(2)


def test_dirichlet_closed_form_is_rational():
    # the sqrt(C)^C in the normalization cancels the volume constant
    dens = DensitySpec.dirichlet(USTAR, 10, validate=False)
    cf = vmi_symbolic(dens, 2, "squared")
    assert cf.radical_pow == 0
    assert cf.degree == 2 * (10 - 2)
    U = JointDistribution([[F(7, 20), F(1, 20)], [F(3, 20), F(9, 20)]])
    num, _ = vmi_numeric(dens, U)
    assert math.sqrt(float(cf.value(U))) == pytest.approx(num, abs=1e-8)


def test_slice_sampling_and_volume():
    # binary slice(.5,.5) has Hausdorff area 1/2
    assert slice_volume(DIAG) == pytest.approx(0.5)
    pts = sample_slice(USTAR, 1000, seed=0)
    sums = pts.sum(axis=1)
    assert np.allclose(sums[:, 0], 0.5, atol=1e-12)
    assert np.allclose(sums[:, 1], 0.5, atol=1e-12)


# -- thresholds ----------------------------------------------------------------


def test_threshold_indicator():
    assert threshold_indicator(USTAR, USTAR) == 1          # reflexive
    prod = random_rational_joint(2, 1).marginal_product()
    assert threshold_indicator(prod, USTAR) == 0
    T = random_rational_stochastic(2, 2)
    below = left_multiply(T, USTAR)
    assert threshold_indicator(USTAR, below) == 1          # by construction
    assert threshold_indicator(below, USTAR) == 0          # strictly degraded


def test_interior_margin():
    assert interior_margin(USTAR, DIAG) == F(1, 5)  # min entry of U* . diag(2,2)
    prod = random_rational_joint(2, 3).marginal_product()
    assert interior_margin(USTAR, prod) is None


def test_convergence_probe_trends():
    probes = [DIAG,                                           # >= ustar
              JointDistribution([[F(1, 10), F(1, 5)], [F(2, 5), F(3, 10)]])]
    rows, summaries = convergence_probe(USTAR, probes, [20, 50], budget=100_000)
    assert len(rows) == 4
    up, down = summaries
    assert up.indicator == 1 and up.monotone_toward_indicator
    assert down.indicator == 0 and down.monotone_toward_indicator
    with pytest.raises(PreconditionError):
        convergence_probe(USTAR, probes, [])
    # the target itself sits on the boundary of its own lower set (the
    # identity witness has zero entries): excluded by precondition
    with pytest.raises(PreconditionError):
        convergence_probe(USTAR, [USTAR], [20], budget=10_000)


def test_off_slice_bound():
    off = JointDistribution([[F(9, 25), F(2, 25)], [F(6, 25), F(8, 25)]])
    rows, summaries = convergence_probe(USTAR, [off], [40], budget=150_000)
    s = summaries[0]
    assert not s.on_slice
    assert s.values[-1] <= s.off_slice_bound + 1e-9


# -- serialization ---------------------------------------------------------------


def test_density_json_round_trip():
    for dens in (DensitySpec.uniform(), mountain(),
                 DensitySpec.dirichlet(USTAR, 20, validate=False)):
        back = DensitySpec.from_json(dens.to_json())
        assert back.variant == dens.variant
        pts = np.asarray([[0.2, 0.1, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25]])
        assert np.allclose(back.eval_batch(pts), dens.eval_batch(pts))
    with pytest.raises(ConfigurationError):
        DensitySpec.evaluator(lambda m: 1.0).to_json()


def test_closed_form_json_round_trip():
    cf = vmi_symbolic(mountain(), 2, "even_times_dmi")
    back = VmiClosedForm.from_json(cf.to_json())
    assert back.poly == cf.poly and back.inner == cf.inner
    assert back.degree == cf.degree and back.mode == cf.mode
