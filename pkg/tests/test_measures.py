import math
from fractions import Fraction as F

import pytest

from volmi.core import (JointDistribution, StpCoords, from_stp,
                        left_multiply, random_joint, random_rational_joint,
                        random_rational_stochastic, random_stochastic)
from volmi.errors import ConfigurationError
from volmi.measures import MeasureSpec, bmi, dmi, dmi_squared_poly, fmi, qmi, smi
from volmi.polyalg import MultiPoly, det_poly

H = F(1, 2)
DIAG = JointDistribution([[H, 0], [0, H]])
UNIFORM = JointDistribution([[F(1, 4)] * 2, [F(1, 4)] * 2])


def test_dmi_examples():
    assert dmi(DIAG) == F(1, 4)
    assert dmi(UNIFORM) == 0
    assert dmi(random_joint(2, 0).marginal_product()) == pytest.approx(0, abs=1e-15)


def test_dmi_slice_identity_symbolic():
    # dmi(from_stp(s, t, p)) = |s - t| p (1 - p): expand the determinant of
    # [[s p, t (1-p)], [(1-s) p, (1-t)(1-p)]] symbolically in (s, t, p)
    s, t, p = (MultiPoly.variable(3, k) for k in range(3))
    one = MultiPoly.constant(3, 1)
    det = (s * p) * ((one - t) * (one - p)) - (t * (one - p)) * ((one - s) * p)
    assert det == (s - t) * p * (one - p)
    # and numerically at the example point (1, 0, .5)
    assert dmi(from_stp(StpCoords(1, 0, H))) == F(1, 4)


def test_smi_examples():
    assert smi(DIAG) == pytest.approx(math.log(2))
    assert smi(UNIFORM) == pytest.approx(0, abs=1e-12)
    assert smi(random_joint(2, 1).marginal_product()) == pytest.approx(0, abs=1e-12)


def test_qmi_examples():
    assert qmi(DIAG) == H
    assert qmi(UNIFORM) == 0
    U = random_rational_joint(2, 2)
    assert qmi(U.marginal_product()) == 0


def test_fmi():
    assert fmi(DIAG, "tvd") == pytest.approx(1.0)
    assert fmi(UNIFORM, "tvd") == pytest.approx(0, abs=1e-12)
    for seed in range(100):
        U = random_joint(2, seed)
        assert fmi(U, "kl") == pytest.approx(smi(U), rel=1e-12, abs=1e-12)
    with pytest.raises(ConfigurationError):
        fmi(DIAG, "hellinger")


def test_bmi():
    assert bmi(DIAG, "quadratic") == pytest.approx(0.5)
    for seed in range(100):
        U = random_joint(2, seed)
        assert bmi(U, "log") == pytest.approx(smi(U), rel=1e-12, abs=1e-12)
        assert bmi(U, "quadratic") == pytest.approx(float(qmi(U)), rel=1e-12)
    assert bmi(UNIFORM, "quadratic") == pytest.approx(0, abs=1e-12)


ALL_FLOAT_MEASURES = [smi, qmi, lambda U: fmi(U, "kl"), lambda U: fmi(U, "tvd"),
                      lambda U: bmi(U, "log"), lambda U: bmi(U, "quadratic")]


def test_information_monotonicity_float():
    for seed in range(1000):
        U = random_joint(2, seed)
        T = random_stochastic(2, 20_000 + seed)
        TU = left_multiply(T, U)
        for m in ALL_FLOAT_MEASURES:
            assert float(m(TU)) <= float(m(U)) + 1e-9
        assert dmi(TU) <= dmi(U) + 1e-9


def test_information_monotonicity_exact():
    poly = dmi_squared_poly(2)
    for seed in range(1000):
        U = random_rational_joint(2, seed)
        T = random_rational_stochastic(2, 30_000 + seed)
        TU = left_multiply(T, U)
        assert dmi(TU) <= dmi(U)
        flat = lambda V: [v for row in V.entries for v in row]
        assert poly.eval(flat(TU)) <= poly.eval(flat(U))


def test_nonnegativity():
    measures = [MeasureSpec.dmi(), MeasureSpec.smi(), MeasureSpec.qmi(),
                MeasureSpec.fmi("tvd"), MeasureSpec.bmi("quadratic"),
                MeasureSpec.dmi_squared(2)]
    for seed in range(200):
        U = random_joint(2, seed)
        for m in measures:
            assert float(m.evaluate(U)) >= -1e-12


def test_vanishing_on_independence():
    for seed in range(50):
        U = random_joint(2, seed).marginal_product()
        for m in ALL_FLOAT_MEASURES:
            assert float(m(U)) == pytest.approx(0, abs=1e-9)
        assert dmi(U) == pytest.approx(0, abs=1e-15)


def test_dmi_squared_poly_degree():
    assert dmi_squared_poly(2).degree() == 4
    assert dmi_squared_poly(3).degree() == 6


def test_measure_spec_json():
    for spec in (MeasureSpec.dmi(), MeasureSpec.smi(), MeasureSpec.qmi(),
                 MeasureSpec.fmi("tvd"), MeasureSpec.bmi("log"),
                 MeasureSpec.dmi_squared(2),
                 MeasureSpec.from_poly(det_poly(2))):
        back = MeasureSpec.from_json(spec.to_json())
        assert back.kind == spec.kind
        U = random_joint(2, 5)
        assert float(back.evaluate(U)) == pytest.approx(float(spec.evaluate(U)))
    with pytest.raises(ConfigurationError):
        MeasureSpec.from_json({"kind": "nope"})


def test_polynomial_surface():
    m = MeasureSpec.dmi_squared(2)
    assert m.is_polynomial_backed()
    assert m.polynomial().degree() == 4
    assert not MeasureSpec.smi().is_polynomial_backed()
