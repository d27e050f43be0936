# The geometry of binary joint distributions: the (s, t, p) cube, slices,
# lower sets, and the informativeness partial order.

from fractions import Fraction as F

from volmi import (ColumnStochasticMatrix, StpCoords, find_degrading_matrix,
                   from_stp, is_less_informative, left_multiply,
                   lower_set_vertices_binary, slice_id, to_stp)

# Every binary joint factors as [[s, t], [1-s, 1-t]] . diag(p, 1-p):
# p is the column-0 mass, s and t are the per-column conditionals.
U = from_stp(StpCoords(F(9, 10), F(1, 5), F(7, 10)))
print("U =", U.entries.tolist())
print("back to coords:", to_stp(U))
print("slice (column sums):", slice_id(U))

# The uninformative line is s = t: the joint becomes a product of marginals.
flat = from_stp(StpCoords(F(1, 2), F(1, 2), F(7, 10)))
print("\nuninformative joint:", flat.entries.tolist())
print("equals its marginal product:", flat == flat.marginal_product())

# U' is less informative than U when U' = T U for a column-stochastic T:
# post-processing the row variable can only destroy information.
T = ColumnStochasticMatrix([[F(4, 5), F(1, 10)], [F(1, 5), F(9, 10)]])
degraded = left_multiply(T, U)
print("\ndegraded = T U =", degraded.entries.tolist())
print("degraded <= U:", is_less_informative(degraded, U))
print("U <= degraded:", is_less_informative(U, degraded))

# The LP route recovers a certifying witness even when U is singular.
witness = find_degrading_matrix(degraded, U)
print("witness T:", witness.entries.tolist())
print("witness reproduces degraded:", left_multiply(witness, U) == degraded)

# The lower set of a binary U is the parallelogram spanned by four vertices:
# U itself, the flipped copy, and the two constant-report collapses.
print("\nlower-set vertices of U:")
for v in lower_set_vertices_binary(U):
    c = to_stp(v)
    print(f"  (s, t) = ({float(c.s):.3f}, {float(c.t):.3f})",
          v.entries.tolist())
