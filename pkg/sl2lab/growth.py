"""Constructive growth engine for subsets of SL_2(F_p).

Each step of the argument that a non-growing set must be large in traces,
and that many traces force many elements, is an operation returning its
witnesses together with a :class:`GrowthCertificate`. Certificates hold only
integer comparisons, so they can be re-checked from the stored cardinalities.
Constants that the argument leaves unspecified (ball radii, escape depths,
exponents) are measured and reported, never asserted.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import structlog

from .constants import (
    DEFAULT_CLOSURE_CAP,
    DEFAULT_DEPTH_CAP,
    DomainError,
    EscapeFailure,
    EscapeMode,
    ExpanderKind,
    HypothesisError,
    ImplementationBugError,
)
from .ffield import Fq2Elem, IntArray, PackedField, QuadraticField
from .gset import (
    GroupSet,
    furcht_certificate,
    generates,
    product_set,
    require_generating,
    tripling_exponent,
)
from .models import GrowthCertificate, at_least, at_most
from .sl2 import ProjVector, SL2Elem, SL2Group
from .zpadd import MulBall, ZpSet, expander_sets

logger = structlog.get_logger(__name__)

# coefficients of (h11, h12, h21, h22) in a linear functional on M_2
Functional = tuple[Fq2Elem, Fq2Elem, Fq2Elem, Fq2Elem]
Matrix = tuple[int, int, int, int]
Basis = tuple[ProjVector, ProjVector]

IDENTITY: Matrix = (1, 0, 0, 1)


def _rref(fq2: QuadraticField, rows: Sequence[Functional]) -> tuple[Functional, ...]:
    """Reduced row echelon form over F_{p^2}, zero rows dropped."""
    work = [list(row) for row in rows]
    pivot_row = 0
    for col in range(4):
        pivot = next(
            (r for r in range(pivot_row, len(work)) if work[r][col] != fq2.zero), None
        )
        if pivot is None:
            continue
        work[pivot_row], work[pivot] = work[pivot], work[pivot_row]
        scale = fq2.inv(work[pivot_row][col])
        work[pivot_row] = [fq2.mul(v, scale) for v in work[pivot_row]]
        for r, row in enumerate(work):
            if r != pivot_row and row[col] != fq2.zero:
                factor = row[col]
                work[r] = [
                    fq2.sub(v, fq2.mul(factor, w)) for v, w in zip(row, work[pivot_row])
                ]
        pivot_row += 1
    return tuple(tuple(row) for row in work[:pivot_row])  # type: ignore[misc]


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of M_2(F_{p^2}), cut out by linear functionals."""

    p: int
    rows: tuple[Functional, ...]

    @classmethod
    def cut_out(cls, fq2: QuadraticField, functionals: Sequence[Functional]) -> "Subspace":
        return cls(fq2.p, _rref(fq2, functionals))

    @property
    def dim(self) -> int:
        return 4 - len(self.rows)

    def intersect(self, fq2: QuadraticField, other: "Subspace") -> "Subspace":
        return Subspace.cut_out(fq2, self.rows + other.rows)

    def translate(self, group: SL2Group, g: SL2Elem) -> "Subspace":
        """``g W = {g y : y in W}``: functionals ``f(g^-1 y)``."""
        fq2 = group.fq2
        inv = group.inv(g)
        m = ((inv.a, inv.b), (inv.c, inv.d))
        moved = []
        for f in self.rows:
            fm = ((f[0], f[1]), (f[2], f[3]))
            moved.append(
                tuple(
                    fq2.add(fq2.scale(fm[0][k], m[0][j]), fq2.scale(fm[1][k], m[1][j]))
                    for j in range(2)
                    for k in range(2)
                )
            )
        return Subspace.cut_out(fq2, moved)  # type: ignore[arg-type]

    def pulled_back(self, fq2: QuadraticField, x: Matrix) -> list[Functional]:
        """Functionals ``c`` with ``c(g) = f(g x)``."""
        xm = ((x[0], x[1]), (x[2], x[3]))
        pulled = []
        for f in self.rows:
            fm = ((f[0], f[1]), (f[2], f[3]))
            pulled.append(
                tuple(
                    fq2.add(fq2.scale(fm[i][0], xm[j][0]), fq2.scale(fm[i][1], xm[j][1]))
                    for i in range(2)
                    for j in range(2)
                )
            )
        return pulled  # type: ignore[return-value]

    def contains_mask(self, group: SL2Group, idx: IntArray, x: Matrix = IDENTITY) -> np.ndarray:
        """Whether ``g x`` lies in the subspace, for each ``g`` in ``idx``."""
        field = PackedField(group.p, 2)
        fq2 = group.fq2
        entries = group.decode_array(idx)
        inside = np.ones(len(idx), dtype=bool)
        for c in self.pulled_back(fq2, x):
            value = np.zeros(len(idx), dtype=np.int64)
            for coefficient, entry in zip(c, entries):
                value = field.add(value, field.mul(np.int64(fq2.pack(coefficient)), entry))
            inside &= value == 0
        return inside


@dataclass(frozen=True)
class SubspaceList:
    subspaces: tuple[Subspace, ...] = ()

    def __post_init__(self) -> None:
        for subspace in self.subspaces:
            if subspace.dim >= 4:
                raise DomainError("Subspaces must be proper.", dim=subspace.dim)

    def __len__(self) -> int:
        return len(self.subspaces)

    def contains_mask(self, group: SL2Group, idx: IntArray, x: Matrix = IDENTITY) -> np.ndarray:
        inside = np.zeros(len(idx), dtype=bool)
        for subspace in self.subspaces:
            inside |= subspace.contains_mask(group, idx, x)
        return inside

    @classmethod
    def eigenvector_loci(cls, group: SL2Group, vectors: Sequence[ProjVector]) -> "SubspaceList":
        """``{h : v is an eigenvector of h}`` for each ``v``."""
        fq2 = group.fq2
        loci = []
        for v1, v2 in vectors:
            v12 = fq2.mul(v1, v2)
            loci.append(
                Subspace.cut_out(
                    fq2, [(v12, fq2.mul(v2, v2), fq2.neg(fq2.mul(v1, v1)), fq2.neg(v12))]
                )
            )
        return cls(tuple(dict.fromkeys(loci)))

    @classmethod
    def basis_alignment(cls, group: SL2Group, basis: Basis) -> "SubspaceList":
        """``{h : h v_i is a multiple of v_j}`` for ``i, j`` in ``{1, 2}``."""
        fq2 = group.fq2
        loci = []
        for vi in basis:
            for vj in basis:
                loci.append(
                    Subspace.cut_out(
                        fq2,
                        [
                            (
                                fq2.mul(vi[0], vj[1]),
                                fq2.mul(vi[1], vj[1]),
                                fq2.neg(fq2.mul(vi[0], vj[0])),
                                fq2.neg(fq2.mul(vi[1], vj[0])),
                            )
                        ],
                    )
                )
        return cls(tuple(dict.fromkeys(loci)))


def basis_entries(
    group: SL2Group, basis: Basis, idx: IntArray
) -> tuple[IntArray, IntArray, IntArray, IntArray]:
    """Entries of ``P^-1 g P`` as packed F_{p^2} codes, ``P`` = columns ``v1, v2``."""
    fq2 = group.fq2
    field = PackedField(group.p, 2)
    (p11, p21), (p12, p22) = basis
    det = fq2.sub(fq2.mul(p11, p22), fq2.mul(p12, p21))
    if det == fq2.zero:
        raise DomainError("The vectors do not form a basis.")
    d_inv = fq2.inv(det)
    i11, i12 = fq2.mul(p22, d_inv), fq2.neg(fq2.mul(p12, d_inv))
    i21, i22 = fq2.neg(fq2.mul(p21, d_inv)), fq2.mul(p11, d_inv)
    P11, P12, P21, P22, I11, I12, I21, I22 = (
        np.int64(fq2.pack(z)) for z in (p11, p12, p21, p22, i11, i12, i21, i22)
    )
    a, b, c, d = group.decode_array(idx)
    mul, add = field.mul, field.add
    q11 = add(mul(a, P11), mul(b, P21))
    q12 = add(mul(a, P12), mul(b, P22))
    q21 = add(mul(c, P11), mul(d, P21))
    q22 = add(mul(c, P12), mul(d, P22))
    return (
        add(mul(I11, q11), mul(I12, q21)),
        add(mul(I11, q12), mul(I12, q22)),
        add(mul(I21, q11), mul(I22, q21)),
        add(mul(I21, q12), mul(I22, q22)),
    )


def trace_set(A: GroupSet) -> ZpSet:
    return ZpSet(A.p, A.traces())


def conjugacy_class_count(A: GroupSet) -> int:
    """Number of conjugacy classes of SL_2(F_p) meeting ``A``."""
    group = A.group
    return len({group.conj_class_id(g) for g in A})


@dataclass(frozen=True)
class TronResult:
    g: SL2Elem
    meet: GroupSet
    certificate: GrowthCertificate


def tron_find(A: GroupSet) -> TronResult:
    """``g`` in ``A`` maximizing ``|C_G(g) ∩ A^-1 A|``, smallest index on ties."""
    if not len(A):
        raise DomainError("The set must be nonempty.")
    group = A.group
    quotients = product_set(A.inverse(), A)
    best_count, best_idx, best_meet = -1, -1, quotients
    for idx in A.indices:
        g = group.decode(int(idx))
        if group.is_central(g):
            meet_idx = quotients.indices
        else:
            centralizer = group.centralizer(g)
            meet_idx = centralizer[quotients.contains_indices(centralizer)]
        if len(meet_idx) > best_count:
            best_count, best_idx = len(meet_idx), int(idx)
            best_meet = GroupSet(group, meet_idx)
    classes = conjugacy_class_count(A)
    aai = len(product_set(product_set(A, A), A.inverse()))
    certificate = GrowthCertificate(
        stage="tron",
        cardinalities={"A": len(A), "classes": classes, "AAA^-1": aai, "meet": best_count},
        inequalities=[at_least("centralizer_meet", best_count * aai, classes * len(A))],
        witnesses={"g": [best_idx]},
    )
    return TronResult(group.decode(best_idx), best_meet, certificate)


def _regular_mask(A: GroupSet) -> np.ndarray:
    traces = A.group.trace_indices(A.indices)
    return (traces != 2) & (traces != A.p - 2)


@dataclass(frozen=True)
class CrudResult:
    regular: GroupSet
    certificate: GrowthCertificate


def crud_filter(A: GroupSet, assume_generating: bool = False) -> CrudResult:
    """Elements of ``A_2`` with trace other than ``±2``: at least ``|A|/4 - 1`` of them."""
    if not assume_generating:
        require_generating(A)
    a2 = A.ball(2)
    B = a2.filter(_regular_mask(a2))
    certificate = GrowthCertificate(
        stage="crud",
        cardinalities={"A": len(A), "A_2": len(a2), "B": len(B)},
        inequalities=[at_least("regular_in_A_2", 4 * len(B), len(A) - 4)],
    )
    return CrudResult(B, certificate)


@dataclass(frozen=True)
class KowResult:
    V: GroupSet
    basis: Basis
    g: SL2Elem
    certificate: GrowthCertificate


def _common_basis(group: SL2Group, V: GroupSet, fallback: SL2Elem) -> Basis:
    for h in V:
        if not group.is_central(h):
            return group.eigen(h).eigenvectors
    return group.eigen(fallback).eigenvectors


def _verify_diagonal(group: SL2Group, V: GroupSet, basis: Basis) -> None:
    for h in V:
        if not all(group.has_eigenvector(h, v) for v in basis):
            raise ImplementationBugError(
                "Element without the common eigenvectors.", element=str(h)
            )
    if len(V) ** 2 <= 1 << 22:
        left = group.mul_indices(V.indices[:, None], V.indices[None, :])
        right = group.mul_indices(V.indices[None, :], V.indices[:, None])
        if not np.array_equal(left, right):
            raise ImplementationBugError("Non-commuting pair in a diagonal set.")


def kow_diag(A: GroupSet, assume_generating: bool = False) -> KowResult:
    """A simultaneously diagonalizable subset of ``A_4``.

    At least ``(|Tr(A)| - 2)(|A|/4 - 1) / |A_6|`` elements, all sharing the
    returned eigenbasis over F_{p^2}.
    """
    traces = len(A.traces())
    if traces < 2 or len(A) < 4:
        raise HypothesisError("Need |Tr(A)| >= 2 and |A| >= 4.", traces=traces, size=len(A))
    group = A.group
    crud = crud_filter(A, assume_generating)
    if not len(crud.regular):
        raise HypothesisError("No element of trace other than ±2 in A_2.")
    tron = tron_find(crud.regular)
    V = tron.meet
    basis = _common_basis(group, V, tron.g)
    _verify_diagonal(group, V, basis)
    a6 = len(A.ball(6))
    certificate = GrowthCertificate(
        stage="kow",
        cardinalities={"A": len(A), "Tr(A)": traces, "A_6": a6, "B": len(crud.regular), "V": len(V)},
        inequalities=crud.certificate.inequalities
        + tron.certificate.inequalities
        + [at_least("diagonal_set", 4 * len(V) * a6, (traces - 2) * (len(A) - 4))],
        witnesses={"g": [group.index(tron.g)], "V": V.to_json()},
    )
    return KowResult(V, basis, tron.g, certificate)


@dataclass(frozen=True)
class EscapeResult:
    witnesses: GroupSet
    depth: int
    mode: EscapeMode
    fraction: float


def escape(
    A: GroupSet,
    W: SubspaceList,
    x: Matrix = IDENTITY,
    mode: EscapeMode = EscapeMode.GENERIC,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> EscapeResult:
    """Elements ``g`` of the smallest ball ``A_m`` with ``g x`` outside ``W``.

    generic returns every escaping element of ``A_m``; rats the one with the
    smallest index; kot every escaping element of ``A_max(m, 2)``.
    """
    group = A.group
    previous = 0
    for m in range(1, depth_cap + 1):
        ball = A.ball(m)
        outside = ~W.contains_mask(group, ball.indices, x)
        if outside.any():
            if mode is EscapeMode.KOT and m < 2:
                m = 2
                ball = A.ball(m)
                outside = ~W.contains_mask(group, ball.indices, x)
            witnesses = ball.filter(outside)
            if mode is EscapeMode.RATS:
                witnesses = GroupSet(group, witnesses.indices[:1])
            logger.debug("escaped", mode=mode.value, depth=m, witnesses=len(witnesses))
            return EscapeResult(witnesses, m, mode, len(witnesses) / max(len(A), 1))
        if len(ball) == previous:
            raise EscapeFailure("The orbit stays inside the subspaces.", depth=m, ball=len(ball))
        previous = len(ball)
    raise EscapeFailure(
        "No escaping element within the depth cap.", depth_cap=depth_cap, ball=previous
    )


@dataclass(frozen=True)
class EscapeCover:
    elements: list[int]
    radius: int
    certificate: GrowthCertificate


def escape_cover(
    A: GroupSet,
    W: SubspaceList,
    x: Matrix = IDENTITY,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    closure_cap: int = DEFAULT_CLOSURE_CAP,
) -> EscapeCover:
    """Finitely many ``g_i`` in ``A_r`` such that every orbit point has some ``g_i y`` outside ``W``.

    Built by passing from ``W`` to ``g W ∩ W`` until the union is empty.
    """
    group = A.group
    fq2 = group.fq2
    closure = generates(A, closure_cap)
    if closure.generates is None:
        raise EscapeFailure("Orbit too large to enumerate.", closure=len(closure.closure))
    orbit = closure.closure.indices
    step = [int(i) for i in A.ball(1).indices if i != group.identity_index]

    def build(subspaces: list[Subspace], level: int) -> tuple[list[int], int]:
        if not subspaces:
            return [group.identity_index], 0
        if level > depth_cap:
            raise EscapeFailure("Cover construction exceeded the depth cap.", depth_cap=depth_cap)
        top = max(s.dim for s in subspaces)
        widest = SubspaceList(tuple(s for s in subspaces if s.dim == top))
        inside = orbit[widest.contains_mask(group, orbit, x)]
        if not inside.size:
            return build([s for s in subspaces if s.dim != top], level)
        for s in step:
            if (~widest.contains_mask(group, group.mul_indices(s, inside), x)).any():
                g = group.decode(s)
                break
        else:
            raise EscapeFailure("The orbit stays inside the subspaces.", level=level)
        moved = [w.translate(group, g) for w in subspaces]
        narrower = list(dict.fromkeys(m.intersect(fq2, w) for m in moved for w in subspaces))
        elements, radius = build(narrower, level + 1)
        g_inv = group.index(group.inv(g))
        shifted = [int(group.mul_indices(g_inv, e)) for e in elements]
        return list(dict.fromkeys(elements + shifted)), radius + 1

    elements, radius = build(list(W.subspaces), 0)
    covered = np.zeros(len(orbit), dtype=bool)
    for e in elements:
        covered |= ~W.contains_mask(group, group.mul_indices(e, orbit), x)
    if not covered.all():
        raise ImplementationBugError("Cover misses an orbit point.", missed=int((~covered).sum()))
    ball = A.ball(radius + 1)
    escapees = int((~W.contains_mask(group, ball.indices, x)).sum())
    certificate = GrowthCertificate(
        stage="carbo",
        cardinalities={"A": len(A), "elements": len(elements), "escapees": escapees},
        inequalities=[at_least("escapees", escapees * len(elements), len(A))],
        witnesses={"elements": sorted(elements)},
        measured={"radius": float(radius)},
    )
    return EscapeCover(sorted(elements), radius, certificate)


def conjugate_diagonal(group: SL2Group, g: SL2Elem, r: int) -> SL2Elem:
    """``g diag(r, r^-1) g^-1`` by its closed form."""
    p = group.p
    ri = group.field.inv(r)
    a, b, c, d = g
    return SL2Elem(
        (r * a * d - ri * b * c) % p,
        (ri - r) * a * b % p,
        (r - ri) * c * d % p,
        (ri * a * d - r * b * c) % p,
    )


@dataclass(frozen=True)
class ChichResult:
    P: GroupSet
    certificate: GrowthCertificate


def _nonvanishing(group: SL2Group, basis: Basis, g: SL2Elem) -> bool:
    entries = basis_entries(group, basis, np.array([group.index(g)], dtype=np.int64))
    return all(int(e[0]) != 0 for e in entries)


def chich_expand(V: GroupSet, g: SL2Elem, basis: Basis) -> ChichResult:
    """``P = V g V g^-1 V`` with ``|P| >= (|V|/4 - 5)|V|^2 / 2``."""
    group = V.group
    for h in V:
        if not all(group.has_eigenvector(h, v) for v in basis):
            raise HypothesisError("V is not diagonal in the given basis.", element=str(h))
    if not _nonvanishing(group, basis, g):
        raise HypothesisError("g maps a basis vector onto a basis line.", g=str(g))
    conj = V.conjugate(g)
    P = product_set(product_set(V, conj), V)
    size = len(V)
    certificate = GrowthCertificate(
        stage="chich",
        cardinalities={"V": size, "P": len(P)},
        inequalities=[at_least("triple_product", 8 * len(P), (size - 20) * size * size, vacuous=size <= 20)],
        witnesses={"g": [group.index(g)]},
    )
    return ChichResult(P, certificate)


def _regular_seed(A: GroupSet) -> SL2Elem:
    """An element of ``A_2`` with trace other than ``±2``."""
    group = A.group
    regular = A.indices[_regular_mask(A)]
    if regular.size:
        return group.decode(int(regular[0]))
    noncentral = [g for g in A if not group.is_central(g)]
    if not noncentral:
        raise HypothesisError("Every element of the set is central.")
    g1 = noncentral[0]
    v = group.eigen(g1).eigenvectors[0]
    for g2 in A:
        if group.has_eigenvector(g2, v):
            continue
        for h in (group.mul(g1, g2), group.mul(group.inv(g1), g2)):
            if group.trace(h) not in (2, group.p - 2):
                return h
        raise ImplementationBugError("Both products are parabolic.", g1=str(g1), g2=str(g2))
    raise HypothesisError("The set lies in a Borel subgroup.")


@dataclass(frozen=True)
class TraceGrowthResult:
    traces: ZpSet
    k: int
    h: SL2Elem
    X: GroupSet
    certificate: GrowthCertificate


def trace_growth(
    A: GroupSet, depth_cap: int = DEFAULT_DEPTH_CAP, assume_generating: bool = False
) -> TraceGrowthResult:
    """Many traces in a bounded ball: ``|Tr(A_k)|^3 >= |X| / 2`` for an escaping ``X``."""
    if not assume_generating:
        require_generating(A)
    group = A.group
    h = _regular_seed(A)
    basis = group.eigen(h).eigenvectors
    W = SubspaceList.eigenvector_loci(group, basis)
    esc = escape(A, W, mode=EscapeMode.KOT, depth_cap=depth_cap)
    X, k0 = esc.witnesses, esc.depth
    for g in X:
        if any(group.has_eigenvector(g, v) for v in basis):
            raise ImplementationBugError("Escaping element keeps an eigenvector.", g=str(g))
    m11, m12, m21, m22 = basis_entries(group, basis, X.indices)
    if np.any(m12 == 0) or np.any(m21 == 0):
        raise ImplementationBugError("Off-diagonal entry vanishes on an escaping element.")
    q = group.p**2
    pairs = np.unique(m11 * q + m22)
    field = PackedField(group.p, 2)
    pair_traces = field.add(pairs // q, pairs % q)
    _, per_trace = np.unique(pair_traces, return_counts=True)
    d_t = int(per_trace.max())
    tr_xx = len(product_set(X, X.inverse()).traces())
    tr_x = len(X.traces())
    tr_hx = len(product_set(GroupSet.of(group, [h]), X).traces())
    k = 2 * k0
    traces = A.ball(k).traces()
    certificate = GrowthCertificate(
        stage="unda",
        cardinalities={
            "A": len(A),
            "X": len(X),
            "D": len(pairs),
            "D_t": d_t,
            "Tr(X)": tr_x,
            "Tr(XX^-1)": tr_xx,
            "Tr(hX)": tr_hx,
            "Tr(A_k)": len(traces),
        },
        inequalities=[
            at_least("funn", 2 * tr_xx * len(pairs), len(X)),
            at_least("trace_line", tr_hx, d_t),
            at_least("pairs_per_trace", d_t * tr_x, len(pairs)),
            at_least("trace_cube", 2 * len(traces) ** 3, len(X)),
        ],
        witnesses={"h": [group.index(h)]},
        measured={
            "k0": float(k0),
            "escape_fraction": esc.fraction,
            "exponent": math.log(len(traces)) / math.log(len(A)) if len(A) > 1 else 0.0,
        },
    )
    return TraceGrowthResult(ZpSet(group.p, traces), k, h, X, certificate)


@dataclass(frozen=True)
class AnduResult:
    P: GroupSet
    k: int
    certificate: GrowthCertificate


def size_from_traces(
    A: GroupSet, depth_cap: int = DEFAULT_DEPTH_CAP, assume_generating: bool = False
) -> AnduResult:
    """``|A_k| >= (Q/4 - 5) Q^2 / 2``, ``Q = (|Tr(A)| - 2)(|A|/4 - 1)/|A_6|``."""
    if A.p <= 3:
        raise HypothesisError("Need p > 3.", p=A.p)
    group = A.group
    kow = kow_diag(A, assume_generating)
    rats = escape(
        A, SubspaceList.basis_alignment(group, kow.basis), mode=EscapeMode.RATS, depth_cap=depth_cap
    )
    g = next(iter(rats.witnesses))
    chich = chich_expand(kow.V, g, kow.basis)
    k = 12 + 2 * rats.depth
    contained = chich.P.issubset(A.ball(k))
    if not contained:
        raise ImplementationBugError("Product set escapes its ball.", k=k)
    traces = len(A.traces())
    a6 = len(A.ball(6))
    Q = Fraction((traces - 2) * (len(A) - 4), 4 * a6)
    bound = Fraction(1, 2) * (Q / 4 - 5) * Q * Q
    certificate = GrowthCertificate(
        stage="andu",
        cardinalities={"A": len(A), "Tr(A)": traces, "A_6": a6, "P": len(chich.P), "k": k},
        inequalities=kow.certificate.inequalities
        + chich.certificate.inequalities
        + [
            at_least(
                "size_from_traces",
                len(chich.P) * bound.denominator,
                bound.numerator,
                vacuous=Q / 4 <= 5,
            )
        ],
        witnesses={"g": [group.index(g)], "eigen_g": [group.index(kow.g)]},
        measured={"rats_depth": float(rats.depth), "Q": float(Q)},
    )
    return AnduResult(chich.P, k, certificate)


def _eigenvalues_on(group: SL2Group, V: GroupSet, basis: Basis) -> ZpSet:
    m11, _, _, _ = basis_entries(group, basis, V.indices)
    return ZpSet(group.p, m11, degree=2)


def growth_certificate(
    A: GroupSet,
    delta: float,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    closure_cap: int = DEFAULT_CLOSURE_CAP,
) -> list[GrowthCertificate]:
    """Run trace growth, diagonal sets, escape, corz and the size bound end to end.

    Stages with explicit constants carry inequalities; the others report.
    """
    group = A.group
    p = group.p
    if not math.log(len(A)) < (3 - delta) * math.log(p):
        raise HypothesisError("The set is not small: |A| >= p^(3 - delta).", size=len(A), p=p, delta=delta)
    require_generating(A, closure_cap)
    chain: list[GrowthCertificate] = []

    unda = trace_growth(A, depth_cap, assume_generating=True)
    chain.append(unda.certificate)
    k0 = unda.k
    logger.info("stage", name="unda", k=k0, traces=len(unda.traces))

    a_k0 = A.ball(k0)
    a_6k0 = A.ball(6 * k0)
    flags = []
    if math.log(len(a_6k0)) >= 7 / 6 * math.log(len(A)):
        flags.append("furcht_exit")
        chain.append(furcht_certificate(A).model_copy(update={"flags": ["furcht_exit"]}))

    kow = kow_diag(a_k0, assume_generating=True)
    chain.append(kow.certificate)
    logger.info("stage", name="kow", V=len(kow.V))

    rats = escape(
        A, SubspaceList.basis_alignment(group, kow.basis), mode=EscapeMode.RATS, depth_cap=depth_cap
    )
    g = next(iter(rats.witnesses))
    k1 = rats.depth
    a, b, c, d = (int(e[0]) for e in basis_entries(group, kow.basis, rats.witnesses.indices))
    field = PackedField(p, 2)
    fq2 = group.fq2
    if 0 in (a, b, c, d):
        raise ImplementationBugError("Escaping element has a vanishing entry.", g=str(g))
    a1 = fq2.unpack(int(field.mul(np.int64(a), np.int64(d))))
    a2 = fq2.neg(fq2.unpack(int(field.mul(np.int64(b), np.int64(c)))))
    chain.append(
        GrowthCertificate(
            stage="rats",
            cardinalities={"k1": k1},
            witnesses={"g": [group.index(g)]},
        )
    )

    eigenvalues = _eigenvalues_on(group, kow.V, kow.basis)
    image, record = expander_sets(MulBall(eigenvalues, 20), ExpanderKind.CORZ, a1, a2)
    outside_base = int(np.count_nonzero(image.members >= p))
    k_corz = 160 * k0 + 2 * k1
    target = A.ball(k_corz)
    target_traces = {int(t) for t in target.traces()}
    outside_traces = len({int(x) for x in image.members} - target_traces)
    chain.append(
        GrowthCertificate(
            stage="corz",
            cardinalities={"V": len(eigenvalues), "V_20": record.ball_size, "image": record.image_size, "k": k_corz},
            inequalities=[
                at_most("image_outside_base_field", outside_base, 0),
                at_most("image_outside_traces", outside_traces, 0),
            ],
            measured={"exponent": record.exponent},
        )
    )

    andu = size_from_traces(target, depth_cap, assume_generating=True)
    chain.append(andu.certificate)
    tr_target = len(target_traces)
    ratio = tr_target * len(target) / len(target.ball(6))

    chain.append(
        GrowthCertificate(
            stage="tripling",
            cardinalities={"A": len(A), "A_k0": len(a_k0), "A_6k0": len(a_6k0)},
            measured={
                "tripling_exponent": tripling_exponent(A),
                "trace_ratio": ratio,
                "log_size_over_log_p": math.log(len(A)) / math.log(p),
            },
            flags=flags,
        )
    )
    return chain


def explicit_stages_pass(chain: Sequence[GrowthCertificate]) -> bool:
    return all(certificate.passed for certificate in chain)

