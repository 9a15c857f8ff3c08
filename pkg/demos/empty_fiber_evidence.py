"""Evidence that a fiber is empty, without a proof.

The 2-5-2 diagram slips through the necessary counting condition on
nearby dimensions (5 <= 2 + 2 + 1), yet its moment fiber over a generic
deformation carries no point satisfying the open conditions: the wide
triangle 5 -> 2 cannot have (A, b) injective.  The solver cannot prove
that, but it can pile up failed starts.
"""

import numpy as np

from bowlab import local_emptiness_check, parse_bow_diagram, solve_fiber
from bowlab.total_space import InfeasibilityEvidence

d = parse_bow_diagram("bow { wavy a [2]; wavy b [5, 2]; edge a -> b; }")

violations = local_emptiness_check(d)
print("counting violations:", violations if violations else "none")

out = solve_fiber(d, {"a": 0.6 + 0.3j, "b": -1.1 + 0.7j}, seed=0, n_starts=25)
assert isinstance(out, InfeasibilityEvidence)

n_conv = sum(1 for s in out.starts if s.converged)
print(f"\n{out.n_starts} starts, {n_conv} converged to a closed solution, "
      f"0 passed (S1)/(S2)")
print(f"best residual seen: {out.best_residual:.2e}")
print("\n start  converged  residual   open?")
for s in out.starts[:10]:
    print(f"  {s.start_index:>4}  {str(s.converged):>9}  "
          f"{s.residual_norm:.1e}  {s.open_conditions_ok}")
print("  ... (remaining starts look the same)")

# converging to residual ~1e-14 while always failing the open
# conditions is how an empty stable locus looks from the outside
print("\nverdict: evidence, not proof")
