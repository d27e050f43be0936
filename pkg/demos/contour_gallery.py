# Contour gallery on the p = .5 slice: how different monotone measures shape
# their level sets around the uninformative diagonal s = t.
#
# Writes CSV grids and SVG contour plots into demos/out/.

import os
from fractions import Fraction as F

from volmi import (DensitySpec, JointDistribution, MeasureSpec, MultiPoly,
                   density_heatmap_grid, emit, marching_squares, slice_grid,
                   vmi_symbolic)
from volmi.viz import matched_level_contour

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

mountain = DensitySpec.polynomial(MultiPoly.monomial(4, (1, 1, 1, 1), 16))
a, b = MultiPoly.variable(4, 0), MultiPoly.variable(4, 1)
q = MultiPoly.constant(4, F(1, 4))
basin = DensitySpec.polynomial(((a - q) ** 2 + (b - q) ** 2).scale(3))

specs = {
    "dmi": MeasureSpec.dmi(),
    "smi": MeasureSpec.smi(),
    "qmi": MeasureSpec.qmi(),
    "vmi_mountain": MeasureSpec.vmi(vmi_symbolic(mountain, 2, "squared")),
    "vmi_basin": MeasureSpec.vmi(vmi_symbolic(basin, 2, "squared")),
    # a deliberately non-monotone "measure" (u00 alone, ours, for contrast):
    # its contours cut through lower sets, which no monotone measure does
    "broken_u00": MeasureSpec.from_poly(MultiPoly.monomial(4, (1, 0, 0, 0)),
                                        label="u00-alone"),
}

overlay = JointDistribution([[F(2, 5), F(1, 10)], [F(3, 10), F(1, 5)]])
ref = (0.75, 0.25)

for name, spec in specs.items():
    grid = slice_grid(spec, 0.5, 201)
    emit(grid, "csv", os.path.join(OUT, f"grid_{name}.csv"))
    top = float(grid.values.max())
    levels = [f * top for f in (0.12, 0.3, 0.55, 0.8)]
    contours = marching_squares(grid, levels)
    emit(contours, "svg", os.path.join(OUT, f"contours_{name}.svg"),
         overlay=overlay)
    level, line = matched_level_contour(grid, *ref)
    print(f"{name:13s} max {top:.4g}; contour through (.75,.25) at "
          f"level {level:.4g} with {len(line)} points")

# the density heatmaps behind the two VMI variants
for name, dens in (("mountain", mountain), ("basin", basin)):
    heat = density_heatmap_grid(dens, 0.5, 201)
    emit(heat, "csv", os.path.join(OUT, f"density_{name}.csv"))

print(f"\nwrote grids, contours, and heatmaps under {OUT}/")
print("straight lines: dmi; outward bows: smi/qmi; inward bows: vmi_mountain")
