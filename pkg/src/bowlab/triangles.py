"""Triangles, their normal-form chart, and two-way edge data.

A triangle on the pair (V1, V2) is a tuple (A, B1, B2, a, b) with

    B2 A - A B1 + a b = 0                                  (a)

together with two open conditions: no nonzero B1-invariant subspace
inside Ker A ∩ Ker b (S1), and no proper B2-invariant subspace
containing Im A + Im a (S2).  Such tuples form a single gauge orbit
over a normal-form chart:

    v1 = v2 = n:  (u, h, I, J), u invertible,
                  triangle = (u, u^-1 h u, h - IJ, I, J u)
    v1 != v2:     (u, eta), u invertible n x n (n = max, m = min),
                  eta constrained to the block shape

                      [ h | 0  | g  ]      rows    m / 1 / n-m-1
                      [ f | 0  | e0 ]      columns m / n-m-1 / 1
                      [ 0 | id | e  ]

with the middle band deleted when n - m = 1.  Conversion back out of a
triangle is exact linear algebra: the chart equations pin u column by
column (Krylov chains of a or b), and the remaining free blocks solve a
single square linear system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    as_matrix,
    image_basis,
    kernel_basis,
    largest_invariant_inside,
    matrix_from_json,
    matrix_to_json,
    rank,
    smallest_invariant_containing,
    subspace_intersection,
    subspace_sum,
)

__all__ = [
    "TriangleData",
    "SquareForm",
    "RectForm",
    "SquareTangent",
    "RectTangent",
    "TwoWayData",
    "ConditionReport",
    "SingularU",
    "NotATriangle",
    "GaugeFixFailed",
    "condition_a_residual",
    "check_S1",
    "check_S2",
    "hurtubise_to_triangle",
    "triangle_to_hurtubise",
    "triangle_moment",
    "triangle_gauge_action",
    "form_gauge_action",
    "form_action_vector",
    "hurtubise_symplectic_pairing",
    "two_way_moment",
    "two_way_symplectic_pairing",
    "rect_blocks",
    "rect_form_from_blocks",
    "random_square_form",
    "random_rect_form",
    "triangle_to_json_dict",
    "triangle_from_json_dict",
    "form_to_json_dict",
    "form_from_json_dict",
]


class SingularU(np.linalg.LinAlgError):
    """The chart matrix u is numerically singular."""


class NotATriangle(ValueError):
    """Input failed condition (a), (S1), or (S2)."""


class GaugeFixFailed(np.linalg.LinAlgError):
    """The chart-recovery linear system is numerically singular."""


@dataclass(frozen=True)
class TriangleData:
    """Triangle (A, B1, B2, a, b); dims read from A (v2 x v1)."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A)
        v2, v1 = A.shape
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B1", as_matrix(self.B1, v1, v1))
        object.__setattr__(self, "B2", as_matrix(self.B2, v2, v2))
        object.__setattr__(self, "a", as_matrix(self.a, v2, 1))
        object.__setattr__(self, "b", as_matrix(self.b, 1, v1))

    @property
    def v1(self) -> int:
        return self.A.shape[1]

    @property
    def v2(self) -> int:
        return self.A.shape[0]

    def scale(self) -> float:
        mats = (self.A, self.B1, self.B2, self.a, self.b)
        vals = [float(np.max(np.abs(m))) for m in mats if m.size]
        return max(vals, default=0.0)


def _eta_spans(n: int, m: int):
    """Row and column block index ranges of the constrained matrix."""
    rows = (slice(0, m), slice(m, m + 1), slice(m + 1, n))
    cols = (slice(0, m), slice(m, n - 1), slice(n - 1, n))
    return rows, cols


def rect_form_from_blocks(v1: int, v2: int, u, h, g, f, e0, e) -> "RectForm":
    """Assemble eta from its free blocks; fixed blocks written exactly."""
    n, m = max(v1, v2), min(v1, v2)
    rows, cols = _eta_spans(n, m)
    eta = np.zeros((n, n), dtype=complex)
    eta[rows[0], cols[0]] = as_matrix(h, m, m)
    eta[rows[0], cols[2]] = as_matrix(g, m, 1)
    eta[rows[1], cols[0]] = as_matrix(f, 1, m)
    eta[rows[1], cols[2]] = as_matrix(e0, 1, 1)
    eta[rows[2], cols[1]] = np.eye(n - m - 1)
    eta[rows[2], cols[2]] = as_matrix(e, n - m - 1, 1)
    return RectForm(v1, v2, u, eta)


def rect_blocks(form: "RectForm") -> dict:
    """Free blocks of eta: keys h, g, f, e0, e."""
    n, m = form.n, form.m
    rows, cols = _eta_spans(n, m)
    return {
        "h": form.eta[rows[0], cols[0]],
        "g": form.eta[rows[0], cols[2]],
        "f": form.eta[rows[1], cols[0]],
        "e0": form.eta[rows[1], cols[2]],
        "e": form.eta[rows[2], cols[2]],
    }


def _check_eta_fixed(eta: np.ndarray, n: int, m: int, what: str, identity: bool):
    rows, cols = _eta_spans(n, m)
    mid = eta[rows[2], cols[1]]
    want = np.eye(n - m - 1) if identity else np.zeros((n - m - 1, n - m - 1))
    if not np.array_equal(mid, want):
        raise ValueError(f"{what}: the band block must be {'id' if identity else '0'} exactly")
    zero_slots = [eta[rows[0], cols[1]], eta[rows[1], cols[1]], eta[rows[2], cols[0]]]
    for block in zero_slots:
        if block.size and np.any(block != 0):
            raise ValueError(f"{what}: mandated zero block of eta is not exactly zero")


@dataclass(frozen=True)
class RectForm:
    """Chart point (u, eta) for v1 != v2; n = max(v1, v2), m = min."""

    v1: int
    v2: int
    u: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        if self.v1 == self.v2:
            raise ValueError("RectForm requires v1 != v2; use SquareForm")
        n = max(self.v1, self.v2)
        object.__setattr__(self, "u", as_matrix(self.u, n, n))
        object.__setattr__(self, "eta", as_matrix(self.eta, n, n))
        _check_eta_fixed(self.eta, n, self.m, "RectForm", identity=True)

    @property
    def n(self) -> int:
        return max(self.v1, self.v2)

    @property
    def m(self) -> int:
        return min(self.v1, self.v2)


@dataclass(frozen=True)
class SquareForm:
    """Chart point (u, h, I, J) for v1 = v2 = n."""

    u: np.ndarray
    h: np.ndarray
    I: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.u)
        n = u.shape[0]
        object.__setattr__(self, "u", as_matrix(u, n, n))
        object.__setattr__(self, "h", as_matrix(self.h, n, n))
        object.__setattr__(self, "I", as_matrix(self.I, n, 1))
        object.__setattr__(self, "J", as_matrix(self.J, 1, n))

    @property
    def n(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class SquareTangent:
    du: np.ndarray
    dh: np.ndarray
    dI: np.ndarray
    dJ: np.ndarray

    def __post_init__(self):
        du = as_matrix(self.du)
        n = du.shape[0]
        object.__setattr__(self, "du", as_matrix(du, n, n))
        object.__setattr__(self, "dh", as_matrix(self.dh, n, n))
        object.__setattr__(self, "dI", as_matrix(self.dI, n, 1))
        object.__setattr__(self, "dJ", as_matrix(self.dJ, 1, n))


@dataclass(frozen=True)
class RectTangent:
    """Tangent (du, deta); deta vanishes on every fixed block of eta."""

    v1: int
    v2: int
    du: np.ndarray
    deta: np.ndarray

    def __post_init__(self):
        n, m = max(self.v1, self.v2), min(self.v1, self.v2)
        object.__setattr__(self, "du", as_matrix(self.du, n, n))
        object.__setattr__(self, "deta", as_matrix(self.deta, n, n))
        _check_eta_fixed(self.deta, n, m, "RectTangent", identity=False)


@dataclass(frozen=True)
class TwoWayData:
    """Edge pair C: V_t -> V_h and D: V_h -> V_t."""

    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        C = as_matrix(self.C)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", as_matrix(self.D, C.shape[1], C.shape[0]))


def _cgauss(rng: np.random.Generator, rows: int, cols: int, scale: float) -> np.ndarray:
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return scale * (re + 1j * im) / np.sqrt(2.0)


def _well_conditioned(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    # resample until cond(u) is modest so round-trips stay near machine precision
    while True:
        u = _cgauss(rng, n, n, scale)
        if n == 0 or np.linalg.cond(u) < 8.0:
            return u


def random_square_form(rng: np.random.Generator, n: int, scale: float = 1.0) -> "SquareForm":
    """Random chart point at v1 = v2 = n with a well-conditioned u."""
    return SquareForm(
        u=_well_conditioned(rng, n, scale),
        h=_cgauss(rng, n, n, scale),
        I=_cgauss(rng, n, 1, scale),
        J=_cgauss(rng, 1, n, scale),
    )


def random_rect_form(rng: np.random.Generator, v1: int, v2: int,
                     scale: float = 1.0) -> "RectForm":
    """Random chart point at v1 != v2 with a well-conditioned u."""
    n, m = max(v1, v2), min(v1, v2)
    return rect_form_from_blocks(
        v1, v2,
        u=_well_conditioned(rng, n, scale),
        h=_cgauss(rng, m, m, scale),
        g=_cgauss(rng, m, 1, scale),
        f=_cgauss(rng, 1, m, scale),
        e0=_cgauss(rng, 1, 1, scale),
        e=_cgauss(rng, n - m - 1, 1, scale),
    )


@dataclass(frozen=True)
class ConditionReport:
    """Boolean verdict plus the offending subspace when it fails."""

    ok: bool
    witness: Subspace | None = None

    def __bool__(self) -> bool:
        return self.ok


def condition_a_residual(t: TriangleData) -> float:
    """Frobenius norm of B2 A - A B1 + a b."""
    return float(np.linalg.norm(t.B2 @ t.A - t.A @ t.B1 + t.a @ t.b))


def check_S1(t: TriangleData, tol: Tolerances = DEFAULT_TOL) -> ConditionReport:
    """No nonzero B1-invariant subspace inside Ker A ∩ Ker b."""
    seed = subspace_intersection(kernel_basis(t.A, tol), kernel_basis(t.b, tol), tol)
    bad = largest_invariant_inside(seed, [t.B1], tol)
    if bad.dim == 0:
        return ConditionReport(True)
    return ConditionReport(False, bad)


def check_S2(t: TriangleData, tol: Tolerances = DEFAULT_TOL) -> ConditionReport:
    """No proper B2-invariant subspace containing Im A + Im a."""
    seed = subspace_sum(image_basis(t.A, tol), image_basis(t.a, tol), tol)
    grown = smallest_invariant_containing(seed, [t.B2], tol)
    if grown.dim == t.v2:
        return ConditionReport(True)
    return ConditionReport(False, grown)


def _invert_or_raise(u: np.ndarray, exc_type, what: str, tol: Tolerances) -> np.ndarray:
    n = u.shape[0]
    if n == 0:
        return u.copy()
    if rank(u, tol) < n:
        raise exc_type(f"{what} is numerically singular")
    return np.linalg.inv(u)


def hurtubise_to_triangle(f, tol: Tolerances = DEFAULT_TOL) -> TriangleData:
    """Case formulas of the chart, producing a genuine triangle.

    v1 = v2:  (u, u^-1 h u, h - IJ, I, J u)
    v1 > v2:  ([id 0 0] u, u^-1 eta u, h, g, [0 0 1] u)
    v1 < v2:  (-u^-1 [id;0;0], -h, -u^-1 eta u, u^-1 [0;1;0], -f)
    """
    if isinstance(f, SquareForm):
        uinv = _invert_or_raise(f.u, SingularU, "u", tol)
        return TriangleData(
            A=f.u,
            B1=uinv @ f.h @ f.u,
            B2=f.h - f.I @ f.J,
            a=f.I,
            b=f.J @ f.u,
        )
    if not isinstance(f, RectForm):
        raise TypeError(f"expected SquareForm or RectForm, got {type(f).__name__}")
    n, m = f.n, f.m
    uinv = _invert_or_raise(f.u, SingularU, "u", tol)
    blocks = rect_blocks(f)
    if f.v1 > f.v2:
        return TriangleData(
            A=f.u[:m, :],
            B1=uinv @ f.eta @ f.u,
            B2=blocks["h"],
            a=blocks["g"],
            b=f.u[n - 1:n, :],
        )
    return TriangleData(
        A=-uinv[:, :m],
        B1=-blocks["h"],
        B2=-uinv @ f.eta @ f.u,
        a=uinv[:, m:m + 1],
        b=-blocks["f"],
    )


def _require_triangle(t: TriangleData, tol: Tolerances):
    res = condition_a_residual(t)
    if res > tol.residual_tol * max(1.0, t.scale()):
        raise NotATriangle(f"condition (a) residual {res:.3e} too large")
    s1 = check_S1(t, tol)
    if not s1:
        raise NotATriangle(f"(S1) fails: invariant subspace of dim {s1.witness.dim} "
                           "inside Ker A ∩ Ker b")
    s2 = check_S2(t, tol)
    if not s2:
        raise NotATriangle(f"(S2) fails: invariant subspace of dim {s2.witness.dim} "
                           "contains Im A + Im a")


def triangle_to_hurtubise(t: TriangleData, tol: Tolerances = DEFAULT_TOL):
    """Invert the chart on a verified triangle.

    The square case is direct algebra.  In the rectangular cases the
    chart equations determine u exactly: one side of u is A (or -A),
    the next column/row is a (or b), and the middle band is the Krylov
    chain of a under -B2 (of b under B1).  The free eta blocks then
    satisfy one square linear system.  (S1)/(S2) make these systems
    invertible in exact arithmetic, so a singular system means the
    input was not a triangle to working precision.
    """
    _require_triangle(t, tol)
    v1, v2 = t.v1, t.v2

    if v1 == v2:
        uinv = _invert_or_raise(t.A, GaugeFixFailed, "A", tol)
        return SquareForm(u=t.A, h=t.A @ t.B1 @ uinv, I=t.a, J=t.b @ uinv)

    if v1 < v2:
        n, m = v2, v1
        cols = [-t.A] if m else []
        vec = t.a
        chain = [vec]
        for _ in range(n - m - 1):
            vec = -t.B2 @ vec
            chain.append(vec)
        w = np.hstack(cols + chain)
        if rank(w, tol) < n:
            raise GaugeFixFailed("Krylov completion of u is numerically singular")
        z = np.linalg.solve(w, -t.B2 @ w[:, n - 1:n])
        return rect_form_from_blocks(
            v1, v2,
            u=np.linalg.inv(w),
            h=-t.B1, g=z[:m], f=-t.b, e0=z[m:m + 1], e=z[m + 1:],
        )

    n, m = v1, v2
    q = n - m - 1
    kappa = [t.b]
    for _ in range(q + 1):
        kappa.append(kappa[-1] @ t.B1)
    M = np.hstack(([t.A.T] if m else []) + [k.T for k in kappa[:q + 1]])
    if rank(M, tol) < n:
        raise GaugeFixFailed("row completion of u is numerically singular")
    z = np.linalg.solve(M, kappa[q + 1].T)
    fvec = z[:m].T
    e0 = z[m:m + 1]
    evec = z[m + 1:]
    rows: list = []
    prev = t.b
    for k in range(q - 1, -1, -1):
        prev = prev @ t.B1 - evec[k, 0] * t.b
        rows.insert(0, prev)
    u = np.vstack([t.A] + rows + [t.b])
    return rect_form_from_blocks(v1, v2, u=u, h=t.B2, g=t.a, f=fvec, e0=e0, e=evec)


def triangle_moment(t: TriangleData) -> tuple:
    """Moment pair (B1, -B2)."""
    return (t.B1.copy(), -t.B2)


def triangle_gauge_action(g1, g2, t: TriangleData) -> TriangleData:
    """(A, B1, B2, a, b) -> (g2 A g1^-1, g1 B1 g1^-1, g2 B2 g2^-1, b g1^-1, g2 a)."""
    g1 = as_matrix(g1, t.v1, t.v1)
    g2 = as_matrix(g2, t.v2, t.v2)
    g1i = np.linalg.inv(g1)
    g2i = np.linalg.inv(g2)
    return TriangleData(
        A=g2 @ t.A @ g1i,
        B1=g1 @ t.B1 @ g1i,
        B2=g2 @ t.B2 @ g2i,
        a=g2 @ t.a,
        b=t.b @ g1i,
    )


def _hat(form: RectForm, gm) -> np.ndarray:
    full = np.eye(form.n, dtype=complex)
    full[:form.m, :form.m] = gm
    return full


def form_gauge_action(g1, g2, f):
    """Chart-side action matching triangle_gauge_action through the chart."""
    if isinstance(f, SquareForm):
        n = f.n
        g1 = as_matrix(g1, n, n)
        g2 = as_matrix(g2, n, n)
        g2i = np.linalg.inv(g2)
        return SquareForm(u=g2 @ f.u @ np.linalg.inv(g1),
                          h=g2 @ f.h @ g2i, I=g2 @ f.I, J=f.J @ g2i)
    gn, gm = (g1, g2) if f.v1 > f.v2 else (g2, g1)
    gn = as_matrix(gn, f.n, f.n)
    gm = as_matrix(gm, f.m, f.m)
    ghat = _hat(f, gm)
    ghat_inv = _hat(f, np.linalg.inv(gm))
    return RectForm(f.v1, f.v2,
                    u=ghat @ f.u @ np.linalg.inv(gn),
                    eta=ghat @ f.eta @ ghat_inv)


def form_action_vector(xi1, xi2, f):
    """Vector field of the chart action at f for Lie element (xi1, xi2)."""
    if isinstance(f, SquareForm):
        n = f.n
        xi1 = as_matrix(xi1, n, n)
        xi2 = as_matrix(xi2, n, n)
        return SquareTangent(du=xi2 @ f.u - f.u @ xi1,
                             dh=xi2 @ f.h - f.h @ xi2,
                             dI=xi2 @ f.I, dJ=-f.J @ xi2)
    xin, xim = (xi1, xi2) if f.v1 > f.v2 else (xi2, xi1)
    xin = as_matrix(xin, f.n, f.n)
    xim = as_matrix(xim, f.m, f.m)
    xihat = np.zeros((f.n, f.n), dtype=complex)
    xihat[:f.m, :f.m] = xim
    return RectTangent(f.v1, f.v2,
                       du=xihat @ f.u - f.u @ xin,
                       deta=xihat @ f.eta - f.eta @ xihat)


def hurtubise_symplectic_pairing(f, t1, t2) -> complex:
    """Chart symplectic form on two tangents.

    Rectangular: tr(deta ∧ du u^-1 + eta du u^-1 ∧ du u^-1).
    Square: same with h in place of eta, plus tr(dI ∧ dJ).
    """
    uinv = np.linalg.inv(f.u)
    x1 = t1.du @ uinv
    x2 = t2.du @ uinv
    if isinstance(f, SquareForm):
        val = np.trace(t1.dh @ x2) - np.trace(t2.dh @ x1)
        val += np.trace(f.h @ (x1 @ x2 - x2 @ x1))
        val += np.trace(t1.dI @ t2.dJ) - np.trace(t2.dI @ t1.dJ)
        return complex(val)
    val = np.trace(t1.deta @ x2) - np.trace(t2.deta @ x1)
    val += np.trace(f.eta @ (x1 @ x2 - x2 @ x1))
    return complex(val)


def two_way_moment(d: TwoWayData) -> tuple:
    """Edge contribution (-DC, CD) at (tail, head)."""
    return (-d.D @ d.C, d.C @ d.D)


def two_way_symplectic_pairing(t1: TwoWayData, t2: TwoWayData) -> complex:
    """tr(dC ∧ dD) on a pair of edge tangents."""
    return complex(np.trace(t2.D @ t1.C) - np.trace(t1.D @ t2.C))


def triangle_to_json_dict(t: TriangleData) -> dict:
    return {
        "v1": t.v1,
        "v2": t.v2,
        "A": matrix_to_json(t.A),
        "B1": matrix_to_json(t.B1),
        "B2": matrix_to_json(t.B2),
        "a": matrix_to_json(t.a),
        "b": matrix_to_json(t.b),
    }


def triangle_from_json_dict(data: dict) -> TriangleData:
    v1, v2 = int(data["v1"]), int(data["v2"])
    return TriangleData(
        A=matrix_from_json(data["A"], v2, v1),
        B1=matrix_from_json(data["B1"], v1, v1),
        B2=matrix_from_json(data["B2"], v2, v2),
        a=matrix_from_json(data["a"], v2, 1),
        b=matrix_from_json(data["b"], 1, v1),
    )


def form_to_json_dict(f) -> dict:
    if isinstance(f, SquareForm):
        return {"case": "square", "u": matrix_to_json(f.u), "h": matrix_to_json(f.h),
                "I": matrix_to_json(f.I), "J": matrix_to_json(f.J)}
    return {"case": "rect", "v1": f.v1, "v2": f.v2,
            "u": matrix_to_json(f.u), "eta": matrix_to_json(f.eta)}


def form_from_json_dict(data: dict):
    if data["case"] == "square":
        n = len(data["u"])
        return SquareForm(u=matrix_from_json(data["u"], n, n),
                          h=matrix_from_json(data["h"], n, n),
                          I=matrix_from_json(data["I"], n, 1),
                          J=matrix_from_json(data["J"], 1, n))
    if data["case"] == "rect":
        v1, v2 = int(data["v1"]), int(data["v2"])
        n = max(v1, v2)
        return RectForm(v1, v2, u=matrix_from_json(data["u"], n, n),
                        eta=matrix_from_json(data["eta"], n, n))
    raise ValueError(f"unknown form case {data['case']!r}")
