"""Graded subspaces of a direct sum of C^{n_k} and invariance machinery.

A graded subspace assigns a Subspace of C^{dims[k]} to every key k.  A
collection of maps (src key, dst key, matrix) is "respected" by a
graded subspace when every map sends the src component into the dst
component.  The two closure operators below are the graded versions of
the ones in linalg; the candidate lattice feeds the heuristic
(un)stability falsifiers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    kernel_basis,
    subspace_image,
    subspace_intersection,
    subspace_preimage,
    subspace_sum,
)

__all__ = [
    "GradedSubspace",
    "zero_graded",
    "full_graded",
    "graded_dims",
    "is_invariant",
    "largest_invariant_graded",
    "smallest_invariant_graded",
    "candidate_lattice",
]


@dataclass(frozen=True)
class GradedSubspace:
    """One subspace per key; keys and ambient dims fixed by the context."""

    parts: dict

    def dim(self, key) -> int:
        return self.parts[key].dim

    def total_dim(self) -> int:
        return sum(s.dim for s in self.parts.values())


def zero_graded(dims: dict) -> GradedSubspace:
    return GradedSubspace({k: Subspace.zero(n) for k, n in dims.items()})


def full_graded(dims: dict) -> GradedSubspace:
    return GradedSubspace({k: Subspace.full(n) for k, n in dims.items()})


def graded_dims(g: GradedSubspace) -> tuple:
    return tuple(sorted((repr(k), s.dim) for k, s in g.parts.items()))


def is_invariant(g: GradedSubspace, maps, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Every (src, dst, m) sends the src part into the dst part."""
    for src, dst, m in maps:
        basis = g.parts[src].basis
        if basis.shape[1] == 0:
            continue
        mapped = np.asarray(m, dtype=complex) @ basis
        resid = mapped - g.parts[dst].projector() @ mapped
        scale = max(1.0, float(np.linalg.norm(mapped)))
        if np.linalg.norm(resid) > tol.rank_tol * scale:
            return False
    return True


def largest_invariant_graded(w: GradedSubspace, maps, tol: Tolerances = DEFAULT_TOL) -> GradedSubspace:
    """Largest graded subspace of w respected by all maps."""
    parts = dict(w.parts)
    total = sum(s.ambient_dim for s in parts.values())
    for _ in range(total + 1):
        before = sum(s.dim for s in parts.values())
        refined = dict(parts)
        for src, dst, m in maps:
            pre = subspace_preimage(np.asarray(m, dtype=complex), parts[dst], tol)
            refined[src] = subspace_intersection(refined[src], pre, tol)
        parts = refined
        if sum(s.dim for s in parts.values()) == before:
            break
    return GradedSubspace(parts)


def smallest_invariant_graded(w: GradedSubspace, maps, tol: Tolerances = DEFAULT_TOL) -> GradedSubspace:
    """Smallest graded subspace containing w respected by all maps."""
    parts = dict(w.parts)
    total = sum(s.ambient_dim for s in parts.values())
    for _ in range(total + 1):
        before = sum(s.dim for s in parts.values())
        grown = dict(parts)
        for src, dst, m in maps:
            img = subspace_image(np.asarray(m, dtype=complex), parts[src], tol)
            grown[dst] = subspace_sum(grown[dst], img, tol)
        parts = grown
        if sum(s.dim for s in parts.values()) == before:
            break
    return GradedSubspace(parts)


def _graded_equal(a: GradedSubspace, b: GradedSubspace, tol: Tolerances) -> bool:
    for k, sa in a.parts.items():
        sb = b.parts[k]
        if sa.dim != sb.dim:
            return False
        if sa.dim and np.linalg.norm(sa.projector() - sb.projector()) > 1e-8:
            return False
    return True


def _sum_graded(a, b, tol):
    return GradedSubspace({k: subspace_sum(a.parts[k], b.parts[k], tol) for k in a.parts})


def _intersect_graded(a, b, tol):
    return GradedSubspace({k: subspace_intersection(a.parts[k], b.parts[k], tol) for k in a.parts})


def _image_graded(g, maps, dims, tol):
    parts = {k: Subspace.zero(n) for k, n in dims.items()}
    for src, dst, m in maps:
        img = subspace_image(np.asarray(m, dtype=complex), g.parts[src], tol)
        parts[dst] = subspace_sum(parts[dst], img, tol)
    return GradedSubspace(parts)


def _preimage_graded(g, maps, dims, tol):
    parts = {k: Subspace.full(n) for k, n in dims.items()}
    for src, dst, m in maps:
        pre = subspace_preimage(np.asarray(m, dtype=complex), g.parts[dst], tol)
        parts[src] = subspace_intersection(parts[src], pre, tol)
    return GradedSubspace(parts)


def _eigenspace_seeds(dims: dict, endos, tol: Tolerances) -> list:
    """Generalized eigenspaces of graded endomorphisms, padded by 0 or full."""
    seeds = []
    for key, m in endos:
        m = np.asarray(m, dtype=complex)
        n = m.shape[0]
        if n == 0:
            continue
        eigvals = np.linalg.eigvals(m)
        scale = max(1.0, float(np.max(np.abs(eigvals))) if eigvals.size else 1.0)
        clusters: list[complex] = []
        for ev in eigvals:
            if not any(abs(ev - c) <= 1e-6 * scale for c in clusters):
                clusters.append(ev)
        for lam in clusters:
            gen = kernel_basis(np.linalg.matrix_power(m - lam * np.eye(n), n), tol)
            for pad in ("zero", "full"):
                parts = {}
                for k, dk in dims.items():
                    if k == key:
                        parts[k] = gen
                    else:
                        parts[k] = Subspace.zero(dk) if pad == "zero" else Subspace.full(dk)
                seeds.append(GradedSubspace(parts))
    return seeds


def candidate_lattice(dims: dict, maps, seeds, endos=(), depth: int = 3,
                      cap: int = 200, tol: Tolerances = DEFAULT_TOL) -> list:
    """Graded subspaces closed under images, preimages, sums, intersections.

    Starts from {0, V} plus the given seeds plus generalized eigenspaces
    of the endo maps, and closes to the given depth with a hard cap on
    the candidate count; the consumers are falsifiers, so an incomplete
    lattice is safe.
    """
    pool = [zero_graded(dims), full_graded(dims)]
    pool.extend(seeds)
    pool.extend(_eigenspace_seeds(dims, endos, tol))

    def push(candidates, g):
        for existing in candidates:
            if _graded_equal(existing, g, tol):
                return False
        candidates.append(g)
        return True

    unique: list[GradedSubspace] = []
    for g in pool:
        push(unique, g)

    frontier = list(unique)
    for _ in range(depth):
        new_frontier = []
        for g in frontier:
            if len(unique) >= cap:
                return unique
            for produced in (_image_graded(g, maps, dims, tol), _preimage_graded(g, maps, dims, tol)):
                if push(unique, produced):
                    new_frontier.append(produced)
        for g in frontier:
            for other in unique[: cap]:
                if len(unique) >= cap:
                    return unique
                for produced in (_sum_graded(g, other, tol), _intersect_graded(g, other, tol)):
                    if push(unique, produced):
                        new_frontier.append(produced)
        if not new_frontier:
            break
        frontier = new_frontier
    return unique
