"""Sliding between moment fibers, and what rank says at a stable point.

Adding a constant to both B's of a triangle shifts the moment values
one segment at a time.  Chaining those shifts moves any fine-grained
fiber mu^-1(nu) onto the coarse fiber over lambda(nu), where lambda
just totals nu along each interval.  The demo checks the trip both
ways on a two-interval cycle, then looks at the three rank conditions
that make the stable locus smooth of the expected dimension.
"""

import numpy as np

from bowlab import parse_bow_diagram, solve_fiber
from bowlab.diagrams import embed_deformation, lambda_of_nu
from bowlab.linalg import rank
from bowlab.total_space import (
    action_differential,
    check_semistable,
    expected_smooth_dimension,
    flatten_point,
    gauge_dim,
    moment_jacobian,
    moment_residual,
    translate_deformation,
)

d = parse_bow_diagram(
    "bow { wavy a [1, 1]; wavy b [1, 1]; edge a -> b; edge b -> a; }")
rng = np.random.default_rng(2)

# a deformation value for every single segment
nu = {s: complex(*rng.normal(size=2)) * 0.5 for s in d.segments()}
lam = lambda_of_nu(d, nu)
print("nu per segment:", {f"{s.interval}:{s.index}": f"{v:.3f}"
                          for s, v in nu.items()})
print("lambda per interval:", {k: f"{v:.3f}" for k, v in lam.items()})

q = solve_fiber(d, lam, seed=1).point
print("\nsolved on the coarse fiber, residual",
      f"{np.max(np.abs(moment_residual(d, q, embed_deformation(d, lam)))):.1e}")

p = translate_deformation(d, q, {s: -v for s, v in nu.items()})
print("translated down: residual against nu",
      f"{np.max(np.abs(moment_residual(d, p, nu))):.1e}")

r = translate_deformation(d, p, nu)
print("translated back: distance to the original",
      f"{np.max(np.abs(flatten_point(d, r) - flatten_point(d, q))):.1e}")

# now the smoothness story at this solved point
theta = {"a": 1, "b": 1}
print("\nstable?", check_semistable(d, q, theta, mode="exact01",
                                    stable=True).kind == "semistable")
mat = action_differential(d, q)
print("rank of the action differential:", rank(mat), "=", gauge_dim(d),
      "(free action)")
jac = moment_jacobian(d, q)
print("moment Jacobian:", jac.shape, "rank", rank(jac), "(full rows)")
print("expected smooth dimension:", expected_smooth_dimension(d))
