"""Tour of the geometry kernel on a 2-D uncertainty set: bounding box,
Chebyshev center, Hit-and-Run samples, center of gravity, analytic center,
and the farthest-vertex distance that drives the exploration schedule.

Pass --plot to save a scatter of the samples and centers to geometry.png.
"""

import sys

import numpy as np

from crnpc import (
    ConstraintSet,
    InequalityPair,
    Polyhedron,
    analytic_center,
    bounding_box,
    center_of_gravity,
    chebyshev_center,
    d_max,
    hit_and_run,
)

rng = np.random.default_rng(42)

# Uncertainty set after two imagined probes: one satisfied, one violated.
cs = ConstraintSet(prior_g_ub=1.0)
cs.append(InequalityPair(flop=1, p_upper=None, p_lower=np.array([1.5, 0.8])))
cs.append(InequalityPair(flop=2, p_upper=np.array([4.0, 0.5]), p_lower=None))
poly = Polyhedron.from_constraint_set(cs, 2)
print(f"polyhedron: {poly.n_halfspaces} halfspaces in {poly.dimension}-D")

box = bounding_box(poly)
print(f"bounding box: lo={np.round(box.lo,4)} hi={np.round(box.hi,4)} "
      f"volume={box.volume:.4f}")

center, radius = chebyshev_center(poly)
print(f"Chebyshev center {np.round(center,4)} with inscribed radius {radius:.4f}")

samples = hit_and_run(poly, 5000, 200, center, rng)
assert all(poly.contains(s) for s in samples[:100])
cg = center_of_gravity(poly, 5000, 200, rng)
ac = analytic_center(poly)
print(f"center of gravity  ~ {np.round(cg, 4)}")
print(f"analytic center      {np.round(ac, 4)}")
print(f"farthest box vertex from CG: {d_max(cg, box):.4f}")

# A cut through the CG splits the volume into comparable halves, which is
# what gives the cutting-plane learner its geometric convergence rate.
direction = rng.standard_normal(2)
direction /= np.linalg.norm(direction)
kept = float(np.mean(samples @ direction <= direction @ cg))
print(f"random cut through the CG keeps {kept:.1%} of the sampled volume")

if "--plot" in sys.argv:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axis = plt.subplots(figsize=(5, 5))
    axis.scatter(samples[:, 0], samples[:, 1], s=2, alpha=0.2, label="samples")
    axis.plot(*cg, "r*", markersize=14, label="CG")
    axis.plot(*ac, "b^", markersize=10, label="AC")
    axis.plot(*center, "go", markersize=8, label="Chebyshev")
    axis.legend()
    axis.set_title("uncertainty set and its centers")
    fig.savefig("geometry.png", dpi=120)
    print("wrote geometry.png")
