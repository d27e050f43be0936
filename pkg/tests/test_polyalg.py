import math
from fractions import Fraction as F

import numpy as np
import pytest

from volmi.errors import ConfigurationError, PreconditionError
from volmi.polyalg import (MultiPoly, det_poly, integrate_out_T,
                           simplex_monomial_integral, total_mass_poly)


def random_poly(nvars, rng, max_terms=6, max_exp=3):
    terms = {}
    for _ in range(rng.integers(1, max_terms + 1)):
        exps = tuple(int(e) for e in rng.integers(0, max_exp + 1, size=nvars))
        terms[exps] = F(int(rng.integers(-20, 21)) or 1, int(rng.integers(1, 9)))
    return MultiPoly(nvars, terms)


def test_eval_examples():
    det2 = det_poly(2)
    assert det2.eval([F(1, 2), 0, 0, F(1, 2)]) == F(1, 4)
    dmi2 = det2 * det2
    assert dmi2.eval([F(2, 5), F(1, 10), F(1, 10), F(2, 5)]) == F(9, 400)
    assert dmi2.degree() == 4


def test_ring_identities():
    p = MultiPoly(4, {(1, 0, 0, 1): F(2), (0, 1, 1, 0): F(-1, 3)})
    zero = MultiPoly(4)
    one = MultiPoly.constant(4, 1)
    assert p * zero == zero
    assert p * one == p
    assert (p - p).is_zero()
    assert zero.degree() == 0


def test_ring_axioms_random():
    rng = np.random.default_rng(42)
    for _ in range(25):
        p, q, r = (random_poly(3, rng) for _ in range(3))
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r
        assert p + q == q + p


def test_eval_is_ring_homomorphism():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p, q = random_poly(4, rng), random_poly(4, rng)
        x = [F(int(rng.integers(-5, 6)), int(rng.integers(1, 7))) for _ in range(4)]
        assert (p * q).eval(x) == p.eval(x) * q.eval(x)
        assert (p + q).eval(x) == p.eval(x) + q.eval(x)


def test_eval_batch_matches_exact():
    rng = np.random.default_rng(3)
    p = random_poly(4, rng)
    pts = rng.random((50, 4))
    batch = p.eval_batch(pts)
    for k in range(50):
        assert batch[k] == pytest.approx(float(p.eval(list(pts[k]))), rel=1e-12)


def test_variable_count_mismatch():
    with pytest.raises(PreconditionError):
        MultiPoly.constant(3, 1) + MultiPoly.constant(4, 1)
    with pytest.raises(ConfigurationError):
        MultiPoly(2, {(1, 2, 3): F(1)})


def test_degree_convention():
    assert MultiPoly(4).degree() == 0
    assert MultiPoly.constant(4, 5).degree() == 0
    assert MultiPoly.monomial(4, (1, 1, 1, 1), 16).degree() == 4


def test_simplex_monomial_integral_closed_forms():
    assert simplex_monomial_integral([0]) == 1
    assert simplex_monomial_integral([1, 1]) == F(1, 24)
    assert simplex_monomial_integral([0, 0]) == F(1, 2)
    with pytest.raises(PreconditionError):
        simplex_monomial_integral([-1])


def test_simplex_monomial_integral_monte_carlo_oracle():
    # uniform samples on the m-simplex via Dirichlet(1,..,1) truncation
    rng = np.random.default_rng(12)
    for trial in range(50):
        m = int(rng.integers(1, 5))
        exps = [int(e) for e in rng.integers(0, 4, size=m)]
        n = 200_000
        full = rng.dirichlet(np.ones(m + 1), size=n)[:, :m]
        vals = np.prod(full ** np.asarray(exps, dtype=float), axis=1)
        vol = 1.0 / math.factorial(m)
        est = vol * vals.mean()
        se = vol * vals.std(ddof=1) / math.sqrt(n)
        exact = float(simplex_monomial_integral(exps))
        assert abs(est - exact) <= 3 * max(se, 1e-12), (m, exps)


def test_integrate_out_T_examples():
    # constant 1 over C=2 integrates to Vol(E) = 1
    one = MultiPoly.constant(6, 1)
    assert integrate_out_T(one, 2) == MultiPoly.constant(4, 1)
    # s*t (the two free T entries) integrates to 1/4
    st = MultiPoly.monomial(6, (0, 0, 0, 0, 1, 1))
    assert integrate_out_T(st, 2) == MultiPoly.constant(4, F(1, 4))


def test_integrate_out_T_full_T_block():
    # with all four T entries: T00 * T10 over column 0 gives B(2,2) = 1/6
    p = MultiPoly.monomial(8, (0, 0, 0, 0, 1, 0, 1, 0))
    assert integrate_out_T(p, 2) == MultiPoly.constant(4, F(1, 6))


def test_integrate_out_T_preserves_u_degree():
    rng = np.random.default_rng(5)
    for _ in range(100):
        # random poly in (u, t) with t-part arbitrary; u-degree must survive
        terms = {}
        for _ in range(4):
            ue = tuple(int(e) for e in rng.integers(0, 3, size=4))
            te = tuple(int(e) for e in rng.integers(0, 3, size=2))
            terms[ue + te] = F(int(rng.integers(1, 9)))
        p = MultiPoly(6, terms)
        udeg = max(sum(e[:4]) for e in p.terms)
        out = integrate_out_T(p, 2)
        assert out.degree() == udeg


def test_integrate_out_T_malformed():
    with pytest.raises(PreconditionError):
        integrate_out_T(MultiPoly.constant(5, 1), 2)


def test_text_round_trip():
    p = MultiPoly.from_text("8/15 * u00^2*u01^2 + 40/9 * u00*u01*u10*u11 - 3/8", 4)
    assert MultiPoly.from_text(p.to_text(), 4) == p
    assert MultiPoly.from_text("0", 4).is_zero()
    with pytest.raises(ConfigurationError):
        MultiPoly.from_text("u99", 4)


def test_json_round_trip():
    rng = np.random.default_rng(17)
    for _ in range(10):
        p = random_poly(4, rng)
        assert MultiPoly.from_json(p.to_json()) == p


def test_compose():
    # p(x, y) = x*y composed with x = u+v, y = u-v gives u^2 - v^2
    p = MultiPoly.monomial(2, (1, 1))
    u_plus_v = MultiPoly(2, {(1, 0): F(1), (0, 1): F(1)})
    u_minus_v = MultiPoly(2, {(1, 0): F(1), (0, 1): F(-1)})
    out = p.compose([u_plus_v, u_minus_v])
    assert out == MultiPoly(2, {(2, 0): F(1), (0, 2): F(-1)})


def test_det_poly_leibniz():
    rng = np.random.default_rng(23)
    for C in (2, 3):
        dp = det_poly(C)
        m = rng.random((C, C))
        assert dp.eval(list(m.reshape(-1))) == pytest.approx(np.linalg.det(m))


def test_total_mass_poly():
    tm = total_mass_poly(2)
    assert tm.eval([F(1, 4)] * 4) == 1
    assert (tm ** 2).degree() == 2
