# Unbiased estimation of polynomial measures from finitely many reports:
# every monomial in the joint's entries becomes a product of indicators over
# distinct samples, so degree-many tasks suffice.

from fractions import Fraction as F

from volmi import (JointDistribution, MultiPoly, compile_ube, dmi_squared_poly,
                   evaluate_ube, exact_expectation)
from volmi.estimators import AveragedUStat, FirstK

U = JointDistribution([[F(2, 5), F(1, 10)], [F(1, 10), F(2, 5)]])
flat = [v for row in U.entries for v in row]

poly = dmi_squared_poly(2)
print("measure: squared determinant, degree", poly.degree())
print("true value at U:", poly.eval(flat))

# FirstK pins monomial factors to the first samples of the (shuffled) batch;
# the U-statistic averages over ordered subsets, killing order dependence.
batch = [(0, 0), (1, 1), (0, 1), (1, 1), (0, 0)]
for policy in (FirstK(), AveragedUStat(), AveragedUStat(subsample=50, seed=1)):
    est = compile_ube(poly, policy)
    print(f"{type(policy).__name__:14s} value on one batch:",
          evaluate_ube(est, batch))

# The estimate varies per batch, but its expectation is the polynomial value
# exactly; the oracle enumerates every outcome sequence with its probability.
for policy in (FirstK(), AveragedUStat()):
    est = compile_ube(poly, policy)
    expect = exact_expectation(est, U, T=5)
    print(f"{type(policy).__name__:14s} exact expectation over T=5:",
          expect, "(unbiased:", expect == poly.eval(flat), ")")

# the same machinery runs any polynomial measure, not just determinants
custom = MultiPoly.from_text("3/7 * u00*u11 - 1/3 * u10^2*u01 + 1/9", 4)
est = compile_ube(custom, AveragedUStat())
print("\ncustom polynomial:", custom.to_text())
print("value:", custom.eval(flat), " expectation:",
      exact_expectation(est, U, T=4))
