# The effort-incentive pipeline on the worked two-by-three model: first-best
# surplus, threshold payments, why determinant payments fall short, and the
# Dirichlet-density approximation sweep.
#
# Writes the sweep table to demos/out/sweep.csv.

import os
from fractions import Fraction as F

from volmi import (approximation_sweep, compute_vstar, dmi_counterexample_check,
                   example_effort_model, find_equilibria, select_equilibrium,
                   threshold_payments)
from volmi.optimizer import sweep_rows_to_csv

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

model = example_effort_model()
vs = compute_vstar(model)
print("strategy surpluses:")
for ia in range(3):
    for ib in range(2):
        surplus = model.value(ia, ib) - model.alice[ia].cost - model.bob[ib].cost
        print(f"  pair ({ia},{ib}): value {model.value(ia, ib)}, "
              f"costs {model.alice[ia].cost}+{model.bob[ib].cost}, "
              f"surplus {surplus}")
print(f"first-best v* = {vs.vstar} at pair "
      f"({vs.alice_index},{vs.bob_index}), threshold U* = "
      f"{[[str(v) for v in row] for row in vs.ustar.entries]}")

# Threshold payments: pay each side its optimal effort plus eps iff the
# realized joint clears U* on that side; the requester keeps v* - 2 eps.
eps = F(1, 2)
scheme = threshold_payments(model, eps)
sel = select_equilibrium(find_equilibria(model, scheme, 0))
print(f"\nthreshold levels {scheme.level_a} / {scheme.level_b}; selected "
      f"equilibrium ({sel.chosen.alice_index},{sel.chosen.bob_index}); "
      f"requester utility {sel.requester_guarantee}")

# Determinant-proportional payments cannot tell the two effort levels apart:
rep = dmi_counterexample_check(model)
print(f"\nequal determinants {rep.det_cheap} = {rep.det_rich}: "
      f"determinant payments cap the requester at {rep.utility_cap} "
      f"instead of {rep.vstar}")

# The sweep approximates the threshold with polynomial measures of growing
# concentration; the closed forms are exact, so the equilibrium accounting is
# a certificate, not a simulation.
result = approximation_sweep(model, eps, 1, [20, 40, 80])
print("\nalpha  T    VMI(U*)   eq      requester")
for r in result.rows:
    print(f"{r.alpha:>5} {r.required_T:>4} {r.vmi_at_ustar:8.4f}  "
          f"({r.eq_a},{r.eq_b})  {float(r.requester_utility):9.3f}")
path = os.path.join(OUT, "sweep.csv")
with open(path, "w", encoding="utf-8") as fh:
    fh.write(sweep_rows_to_csv(result))
print(f"\nwrote {path}")
print(f"final guarantee {result.rows[-1].requester_utility} >= "
      f"v* - 4 eps = {vs.vstar - 4 * eps}")
