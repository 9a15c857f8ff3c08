"""Normal-form coordinates for a single triangle, both directions.

A triangle (A, B1, B2, a, b) satisfying the matrix condition and the
two open conditions is pinned, uniquely, by a much smaller chart: a
square pair needs (u, h, I, J), a rectangular pair a single banded
matrix eta next to an invertible u.  The round trip through the chart
is the identity, and the moment map reads off the B's.
"""

import numpy as np

from bowlab.triangles import (
    check_S1,
    check_S2,
    condition_a_residual,
    hurtubise_to_triangle,
    random_rect_form,
    rect_blocks,
    triangle_moment,
    triangle_to_hurtubise,
)

rng = np.random.default_rng(5)

# a wide pair: 3 -> 2, so eta is 3x3 with a pinned identity band
f = random_rect_form(rng, 3, 2)
print("u =\n", np.round(f.u, 3))
print("eta =\n", np.round(f.eta, 3))
print("eta blocks:", {k: v.shape for k, v in rect_blocks(f).items()})

t = hurtubise_to_triangle(f)
print("\ntriangle shapes:",
      {n: getattr(t, n).shape for n in ("A", "B1", "B2", "a", "b")})
print("condition (a) residual:",
      f"{np.max(np.abs(condition_a_residual(t))):.2e}")
print("(S1)", check_S1(t).ok, " (S2)", check_S2(t).ok)
print("rank A =", np.linalg.matrix_rank(t.A), "= min(3, 2)")

g = triangle_to_hurtubise(t)
print("\nround trip |u - u'| =", f"{np.max(np.abs(f.u - g.u)):.2e}")
print("round trip |eta - eta'| =", f"{np.max(np.abs(f.eta - g.eta)):.2e}")

m1, m2 = triangle_moment(t)
print("\nmoment pieces are (B1, -B2):",
      np.allclose(m1, t.B1), np.allclose(m2, -t.B2))
