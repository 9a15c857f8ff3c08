"""Framed double-quiver representation spaces.

A representation point lives in T*Rep(Q, v) plus framing maps: for each
arrow e an x_e: V_{t(e)} -> V_{h(e)} with its reverse y_e, and at each
vertex a pair I_i: W_i -> V_i, J_i: V_i -> W_i.  The moment map of the
GL(v) base-change action is [x, y] + IJ vertex by vertex, and the
semistability test is the kernel/image subrepresentation criterion.

Loops and parallel arrows are allowed, so arrows are addressed by their
index in Quiver.arrows, not by endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm

import numpy as np

from .graded import (
    GradedSubspace,
    candidate_lattice,
    is_invariant,
    largest_invariant_graded,
    smallest_invariant_graded,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    as_matrix,
    image_basis,
    kernel_basis,
    matrix_from_json,
    matrix_to_json,
    snap_small_to_zero,
    subspace_intersection,
    subspace_sum,
)

__all__ = [
    "Quiver",
    "QuiverRepPoint",
    "StabilityVerdict",
    "Exact01Unavailable",
    "rep_moment_map",
    "rep_gauge_action",
    "rep_symplectic_pairing",
    "rep_semistable",
    "integerize_weights",
    "quiver_point_to_json_dict",
    "quiver_point_from_json_dict",
]


class Exact01Unavailable(ValueError):
    """exact01 mode was requested but some vertex dimension exceeds 1."""


@dataclass(frozen=True)
class Quiver:
    """Finite quiver; loops and parallel arrows allowed."""

    vertices: tuple
    arrows: tuple

    def __init__(self, vertices, arrows):
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "arrows", tuple((t, h) for t, h in arrows))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        vset = set(self.vertices)
        for t, h in self.arrows:
            if t not in vset or h not in vset:
                raise ValueError(f"arrow ({t!r}, {h!r}) references unknown vertex")


@dataclass(frozen=True)
class QuiverRepPoint:
    """Point of the framed doubled representation space.

    x[k], y[k] belong to arrow k of `quiver.arrows`; I and J are keyed by
    vertex.  Tangent vectors reuse this container (same shapes).
    """

    quiver: Quiver
    v: dict
    w: dict
    x: tuple
    y: tuple
    I: dict
    J: dict

    def __post_init__(self):
        q = self.quiver
        if set(self.v) != set(q.vertices) or set(self.w) != set(q.vertices):
            raise ValueError("v and w must be keyed by the quiver vertices")
        for dims in (self.v, self.w):
            for i, d in dims.items():
                if int(d) != d or d < 0:
                    raise ValueError(f"dimension at {i!r} must be a nonnegative integer")
        object.__setattr__(self, "v", {i: int(self.v[i]) for i in q.vertices})
        object.__setattr__(self, "w", {i: int(self.w[i]) for i in q.vertices})
        if len(self.x) != len(q.arrows) or len(self.y) != len(q.arrows):
            raise ValueError("need one (x, y) pair per arrow")
        object.__setattr__(self, "x", tuple(
            as_matrix(m, self.v[h], self.v[t])
            for m, (t, h) in zip(self.x, q.arrows)))
        object.__setattr__(self, "y", tuple(
            as_matrix(m, self.v[t], self.v[h])
            for m, (t, h) in zip(self.y, q.arrows)))
        object.__setattr__(self, "I", {
            i: as_matrix(self.I[i], self.v[i], self.w[i]) for i in q.vertices})
        object.__setattr__(self, "J", {
            i: as_matrix(self.J[i], self.w[i], self.v[i]) for i in q.vertices})

    @staticmethod
    def zeros(quiver: Quiver, v: dict, w: dict) -> "QuiverRepPoint":
        x = tuple(np.zeros((v[h], v[t]), dtype=complex) for t, h in quiver.arrows)
        y = tuple(np.zeros((v[t], v[h]), dtype=complex) for t, h in quiver.arrows)
        I = {i: np.zeros((v[i], w[i]), dtype=complex) for i in quiver.vertices}
        J = {i: np.zeros((w[i], v[i]), dtype=complex) for i in quiver.vertices}
        return QuiverRepPoint(quiver, dict(v), dict(w), x, y, I, J)

    def scale(self) -> float:
        """Largest entry magnitude over all matrices; 0 for the zero point."""
        mats = list(self.x) + list(self.y) + list(self.I.values()) + list(self.J.values())
        vals = [float(np.max(np.abs(m))) for m in mats if m.size]
        return max(vals, default=0.0)


def rep_moment_map(p: QuiverRepPoint) -> dict:
    """[x, y] + IJ at every vertex: sum of x_e y_e over incoming arrows
    minus y_e x_e over outgoing, plus I_i J_i."""
    q = p.quiver
    mu = {i: (p.I[i] @ p.J[i]).astype(complex) for i in q.vertices}
    for k, (t, h) in enumerate(q.arrows):
        mu[h] = mu[h] + p.x[k] @ p.y[k]
        mu[t] = mu[t] - p.y[k] @ p.x[k]
    return mu


def rep_gauge_action(g: dict, p: QuiverRepPoint) -> QuiverRepPoint:
    """Base change by g_i in GL(v_i): (x, y, I, J) -> (gxg^-1, gyg^-1, gI, Jg^-1)."""
    q = p.quiver
    ginv = {}
    for i in q.vertices:
        gi = as_matrix(g[i], p.v[i], p.v[i])
        ginv[i] = np.linalg.inv(gi)
    g = {i: as_matrix(g[i], p.v[i], p.v[i]) for i in q.vertices}
    x = tuple(g[h] @ p.x[k] @ ginv[t] for k, (t, h) in enumerate(q.arrows))
    y = tuple(g[t] @ p.y[k] @ ginv[h] for k, (t, h) in enumerate(q.arrows))
    I = {i: g[i] @ p.I[i] for i in q.vertices}
    J = {i: p.J[i] @ ginv[i] for i in q.vertices}
    return QuiverRepPoint(q, p.v, p.w, x, y, I, J)


def rep_symplectic_pairing(t1: QuiverRepPoint, t2: QuiverRepPoint) -> complex:
    """tr(dx ∧ dy + dI ∧ dJ) on a pair of tangents (constant coefficients)."""
    if t1.quiver is not t2.quiver and t1.quiver != t2.quiver:
        raise ValueError("tangents belong to different quivers")
    val = 0.0 + 0.0j
    for k in range(len(t1.quiver.arrows)):
        val += np.trace(t2.y[k] @ t1.x[k]) - np.trace(t1.y[k] @ t2.x[k])
    for i in t1.quiver.vertices:
        val += np.trace(t2.J[i] @ t1.I[i]) - np.trace(t1.J[i] @ t2.I[i])
    return complex(val)


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a (semi)stability test.

    kind: "semistable" (definitive), "unstable" (witness attached), or
        "not-falsified" (heuristic search found no destabilizing
        subspace; NOT a proof of semistability).
    witness: destabilizing graded subspace when kind == "unstable".
    clause: "kernel" when the witness sits inside Ker J with positive
        pairing, "image" when it contains Im I with negative copairing.
    """

    kind: str
    witness: GradedSubspace | None = None
    clause: str | None = None

    def __post_init__(self):
        if self.kind not in ("semistable", "unstable", "not-falsified"):
            raise ValueError(f"unknown verdict kind {self.kind!r}")
        if (self.kind == "unstable") != (self.witness is not None):
            raise ValueError("unstable verdicts carry a witness, others do not")


def integerize_weights(theta: dict) -> dict:
    """Scale rational weights to integers by the LCM of denominators.

    Accepts ints, Fractions, and floats (taken at exact binary value).
    Semistability is invariant under positive rescaling, so the scaled
    weights decide the same condition.
    """
    fracs = {}
    for key, val in theta.items():
        if isinstance(val, Fraction):
            fracs[key] = val
        elif isinstance(val, int) or isinstance(val, np.integer):
            fracs[key] = Fraction(int(val))
        elif isinstance(val, float):
            fracs[key] = Fraction(val)
        else:
            raise TypeError(f"weight for {key!r} must be int, float, or Fraction")
    denom = lcm(*(f.denominator for f in fracs.values())) if fracs else 1
    return {key: int(f * denom) for key, f in fracs.items()}


def _zero_tol(p_scale: float, tol: Tolerances) -> float:
    return tol.rank_tol * max(1.0, p_scale)


def _support_subspace(p: QuiverRepPoint, support: frozenset) -> GradedSubspace:
    parts = {}
    for i in p.quiver.vertices:
        if i in support:
            parts[i] = Subspace.full(p.v[i])
        else:
            parts[i] = Subspace.zero(p.v[i])
    return GradedSubspace(parts)


def _exact01(p: QuiverRepPoint, theta: dict, tol: Tolerances) -> StabilityVerdict:
    q = p.quiver
    if any(p.v[i] > 1 for i in q.vertices):
        raise Exact01Unavailable(
            "exact01 requires every vertex dimension <= 1, got "
            + str({i: p.v[i] for i in q.vertices if p.v[i] > 1}))
    ztol = _zero_tol(p.scale(), tol)
    ones = [i for i in q.vertices if p.v[i] == 1]

    def norm(m):
        return float(np.linalg.norm(m)) if m.size else 0.0

    for r in range(len(ones) + 1):
        for chosen in combinations(ones, r):
            s = frozenset(chosen)
            invariant = True
            for k, (t, h) in enumerate(q.arrows):
                if t in s and h not in s and norm(p.x[k]) > ztol:
                    invariant = False
                    break
                if h in s and t not in s and norm(p.y[k]) > ztol:
                    invariant = False
                    break
            if not invariant:
                continue
            if all(norm(p.J[i]) <= ztol for i in s):
                if sum(theta[i] for i in s) > 0:
                    return StabilityVerdict("unstable", _support_subspace(p, s), "kernel")
            if all(norm(p.I[i]) <= ztol for i in ones if i not in s):
                if sum(theta[i] for i in ones if i not in s) < 0:
                    return StabilityVerdict("unstable", _support_subspace(p, s), "image")
    return StabilityVerdict("semistable")


def _rep_maps(p: QuiverRepPoint) -> list:
    maps = []
    for k, (t, h) in enumerate(p.quiver.arrows):
        maps.append((t, h, p.x[k]))
        maps.append((h, t, p.y[k]))
    return maps


def _heuristic(p: QuiverRepPoint, theta: dict, tol: Tolerances) -> StabilityVerdict:
    q = p.quiver
    ztol = tol.rank_tol * max(1.0, p.scale())
    # noise-level matrices read as zeros (see snap_small_to_zero)
    p = QuiverRepPoint(q, p.v, p.w,
                       tuple(snap_small_to_zero(m, ztol) for m in p.x),
                       tuple(snap_small_to_zero(m, ztol) for m in p.y),
                       {i: snap_small_to_zero(p.I[i], ztol) for i in q.vertices},
                       {i: snap_small_to_zero(p.J[i], ztol) for i in q.vertices})
    dims = dict(p.v)
    maps = _rep_maps(p)
    ker_j = GradedSubspace({i: kernel_basis(p.J[i], tol) for i in q.vertices})
    im_i = GradedSubspace({i: image_basis(p.I[i], tol) for i in q.vertices})
    endos = []
    for k, (t, h) in enumerate(q.arrows):
        if t == h:
            endos.append((t, p.x[k]))
            endos.append((t, p.y[k]))
    candidates = candidate_lattice(dims, maps, [ker_j, im_i], endos=endos, tol=tol)

    for cand in candidates:
        inside = GradedSubspace({
            i: subspace_intersection(cand.parts[i], ker_j.parts[i], tol)
            for i in q.vertices})
        sub = largest_invariant_graded(inside, maps, tol)
        if sum(theta[i] * sub.dim(i) for i in q.vertices) > 0:
            if is_invariant(sub, maps, tol):
                return StabilityVerdict("unstable", sub, "kernel")

        around = GradedSubspace({
            i: subspace_sum(cand.parts[i], im_i.parts[i], tol)
            for i in q.vertices})
        sup = smallest_invariant_graded(around, maps, tol)
        if sum(theta[i] * (p.v[i] - sup.dim(i)) for i in q.vertices) < 0:
            if is_invariant(sup, maps, tol):
                return StabilityVerdict("unstable", sup, "image")
    return StabilityVerdict("not-falsified")


def rep_semistable(p: QuiverRepPoint, theta: dict, mode: str = "heuristic",
                   tol: Tolerances = DEFAULT_TOL) -> StabilityVerdict:
    """Kernel/image semistability criterion for framed representations.

    A point is semistable iff every (x, y)-invariant graded subspace V'
    contained in Ker J has theta-pairing <= 0, and every one containing
    Im I has theta-copairing >= 0.

    exact01 enumerates all graded supports and is a decision procedure,
    available only when every v_i <= 1.  heuristic searches a finite
    lattice of invariant subspaces: "unstable" comes with a verified
    witness, "not-falsified" is not a proof.
    """
    if set(theta) != set(p.quiver.vertices):
        raise ValueError("theta must be keyed by the quiver vertices")
    itheta = integerize_weights(theta)
    if all(val == 0 for val in itheta.values()):
        return StabilityVerdict("semistable")
    if mode == "exact01":
        return _exact01(p, itheta, tol)
    if mode == "heuristic":
        return _heuristic(p, itheta, tol)
    raise ValueError(f"unknown mode {mode!r}; expected 'exact01' or 'heuristic'")


def quiver_point_to_json_dict(p: QuiverRepPoint) -> dict:
    q = p.quiver
    return {
        "vertices": list(q.vertices),
        "arrows": [[t, h] for t, h in q.arrows],
        "v": {str(i): p.v[i] for i in q.vertices},
        "w": {str(i): p.w[i] for i in q.vertices},
        "x": [matrix_to_json(m) for m in p.x],
        "y": [matrix_to_json(m) for m in p.y],
        "I": {str(i): matrix_to_json(p.I[i]) for i in q.vertices},
        "J": {str(i): matrix_to_json(p.J[i]) for i in q.vertices},
    }


def quiver_point_from_json_dict(data: dict) -> QuiverRepPoint:
    q = Quiver(data["vertices"], [tuple(a) for a in data["arrows"]])
    v = {i: int(data["v"][str(i)]) for i in q.vertices}
    w = {i: int(data["w"][str(i)]) for i in q.vertices}
    x = tuple(matrix_from_json(m, v[h], v[t])
              for m, (t, h) in zip(data["x"], q.arrows))
    y = tuple(matrix_from_json(m, v[t], v[h])
              for m, (t, h) in zip(data["y"], q.arrows))
    I = {i: matrix_from_json(data["I"][str(i)], v[i], w[i]) for i in q.vertices}
    J = {i: matrix_from_json(data["J"][str(i)], w[i], v[i]) for i in q.vertices}
    return QuiverRepPoint(q, v, w, x, y, I, J)
