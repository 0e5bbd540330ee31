"""Cayley graphs of SL_2(F_p): diameter, girth, random walks and spectra.

The graph is never stored. Neighbours of ``g`` are ``g s`` for ``s`` in
``A ∪ A^-1``, computed on canonical indices; only per-vertex bookkeeping
arrays of length ``|G|`` are allocated, and only below the BFS cap.
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph
import structlog

from .constants import (
    DEFAULT_BFS_CAP,
    DENSE_SPECTRAL_LIMIT,
    POWER_ITERATION_CAP,
    POWER_ITERATION_TOL,
    CapExceededError,
    ConvergenceError,
    DomainError,
    HypothesisError,
    ImplementationBugError,
)
from .ffield import IntArray
from .gset import GroupSet, generates
from .models import BfsResult, FreeWordReport, GirthResult, PairRecord, PairStats, SpectralResult
from .parallel import chunked_map, split, trial_rngs
from .sl2 import SL2Elem, SL2Group, sl2_group
from .word import Letter, Word

logger = structlog.get_logger(__name__)

FloatArray = npt.NDArray[np.float64]
IntMatrix = tuple[int, int, int, int]


@dataclass(frozen=True)
class CayleyContext:
    """Generators ``A`` of SL_2(F_p), used symmetrically."""

    source: GroupSet
    generates: Optional[bool]

    @classmethod
    def build(cls, group: SL2Group, elements: Sequence[SL2Elem], cap: int = DEFAULT_BFS_CAP) -> "CayleyContext":
        source = GroupSet.of(group, elements)
        if not len(source):
            raise DomainError("A Cayley graph needs at least one generator.")
        return cls(source, generates(source, cap).generates)

    @property
    def group(self) -> SL2Group:
        return self.source.group

    @property
    def p(self) -> int:
        return self.source.p

    @property
    def universe(self) -> int:
        return self.group.order

    @cached_property
    def steps(self) -> IntArray:
        """Distinct elements of ``A ∪ A^-1``."""
        return self.source.union(self.source.inverse()).indices

    @cached_property
    def letters(self) -> tuple[IntArray, IntArray, npt.NDArray[np.bool_]]:
        """Letters over ``A``: element index, source index and inversion flag.

        Letter ``2k`` is the ``k``-th element of ``A`` and ``2k + 1`` its inverse.
        """
        src = np.repeat(self.source.indices, 2)
        inverted = np.tile(np.array([False, True]), len(self.source))
        elements = np.where(inverted, self.group.inv_indices(src), src)
        return elements, src, inverted

    def require_generating(self) -> None:
        if self.generates is None:
            raise CapExceededError("Generation undecided at this scale.", p=self.p)
        if not self.generates:
            closure = len(generates(self.source).closure)
            raise HypothesisError("The generators do not generate the group.", closure=closure, order=self.universe)

    def check_cap(self, cap: int) -> None:
        if self.universe > cap:
            raise CapExceededError("The group is larger than the cap.", order=self.universe, cap=cap)


def _neighbours(ctx: CayleyContext, frontier: IntArray, workers: Optional[int]) -> IntArray:
    steps = ctx.steps
    group = ctx.group

    def expand(chunk: IntArray) -> IntArray:
        return np.unique(group.mul_indices(chunk[:, None], steps[None, :]))

    parts = chunked_map(expand, split(frontier, workers, min_chunk=max(1, 4096 // len(steps))), workers)
    return np.unique(np.concatenate(parts))


def bfs_diameter(ctx: CayleyContext, cap: int = DEFAULT_BFS_CAP, workers: Optional[int] = None) -> BfsResult:
    """Eccentricity of the identity, which is the diameter by vertex transitivity."""
    ctx.check_cap(cap)
    ctx.require_generating()
    visited = np.zeros(ctx.universe, dtype=bool)
    frontier = np.array([ctx.group.identity_index], dtype=np.int64)
    visited[frontier] = True
    spheres = [1]
    while True:
        reached = _neighbours(ctx, frontier, workers)
        frontier = reached[~visited[reached]]
        if not frontier.size:
            break
        visited[frontier] = True
        spheres.append(int(frontier.size))
        logger.debug("bfs_level", radius=len(spheres) - 1, sphere=int(frontier.size))
    if sum(spheres) != ctx.universe:
        raise ImplementationBugError("Spheres do not partition the group.", total=sum(spheres))
    return BfsResult(diameter=len(spheres) - 1, spheres=spheres)


def default_girth_length(p: int) -> int:
    """``floor(log p / (2 log 4))``, at least 1."""
    return max(1, int(math.log(p) / (2 * math.log(4))))


def _spell(ctx: CayleyContext, parent: IntArray, letter: IntArray, vertex: int) -> list[int]:
    """Letter ids along the BFS tree from the identity to ``vertex``."""
    path = []
    root = ctx.group.identity_index
    while vertex != root:
        path.append(int(letter[vertex]))
        vertex = int(parent[vertex])
    return path[::-1]


def girth(ctx: CayleyContext, max_len: Optional[int] = None, cap: int = DEFAULT_BFS_CAP) -> GirthResult:
    """Shortest nonempty reduced word over ``A ∪ A^-1`` that evaluates to the identity.

    A non-tree edge ``(u, s)`` reaching a visited ``v`` closes the relation
    ``w(u) s w(v)^-1`` of length ``d(u) + 1 + d(v)``; the least such length is
    the girth.
    """
    ctx.check_cap(cap)
    max_len = default_girth_length(ctx.p) if max_len is None else max_len
    group = ctx.group
    elements, src, inverted = ctx.letters
    n_letters = len(elements)
    undo = np.arange(n_letters) ^ 1
    parent = np.full(ctx.universe, -1, dtype=np.int64)
    letter = np.full(ctx.universe, -1, dtype=np.int64)
    depth = np.full(ctx.universe, -1, dtype=np.int64)
    root = group.identity_index
    depth[root] = 0
    frontier = np.array([root], dtype=np.int64)
    best: Optional[tuple[int, int, int, int]] = None
    d = 0
    while frontier.size and 2 * d <= max_len:
        targets = group.mul_indices(frontier[:, None], elements[None, :])
        u = np.repeat(frontier, n_letters)
        ell = np.tile(np.arange(n_letters), len(frontier))
        v = targets.ravel()
        # drop backtracking along the tree edge into u
        keep = (u == root) | (ell != undo[np.maximum(letter[u], 0)])
        u, ell, v = u[keep], ell[keep], v[keep]
        fresh = depth[v] < 0
        new, first = np.unique(v[fresh], return_index=True)
        tree_edge = np.zeros(len(v), dtype=bool)
        tree_edge[np.flatnonzero(fresh)[first]] = True
        parent[new] = u[fresh][first]
        letter[new] = ell[fresh][first]
        depth[new] = d + 1
        closing = ~tree_edge
        if closing.any():
            lengths = d + 1 + depth[v[closing]]
            at = int(np.argmin(lengths))
            length = int(lengths[at])
            if best is None or length < best[0]:
                best = (length, int(u[closing][at]), int(ell[closing][at]), int(v[closing][at]))
        if best is not None and best[0] <= 2 * d + 2:
            break
        frontier = new
        d += 1
    if best is None or best[0] > max_len:
        return GirthResult(girth=None, max_len=max_len)
    length, u_end, ell_end, v_end = best
    ids = _spell(ctx, parent, letter, u_end) + [ell_end] + [i ^ 1 for i in reversed(_spell(ctx, parent, letter, v_end))]
    relation = Word(
        p=ctx.p,
        context_hash=ctx.source.context_hash,
        letters=tuple(Letter(index=int(src[i]), inverted=bool(inverted[i])) for i in ids),
    )
    if len(relation) != length or not relation.is_reduced() or relation.evaluate() != group.identity:
        raise ImplementationBugError("Girth witness failed its check.", length=length)
    return GirthResult(girth=length, max_len=max_len, relation=relation)


class LazyKernel:
    """``psi = delta_I / 2 + uniform(A ∪ A^-1) / 2`` and its transition operator."""

    def __init__(self, ctx: CayleyContext):
        self.ctx = ctx
        self.weights = {int(s): 0.5 / len(ctx.steps) for s in ctx.steps}
        identity = ctx.group.identity_index
        self.weights[identity] = self.weights.get(identity, 0.0) + 0.5

    @cached_property
    def matrix(self) -> scipy.sparse.csr_matrix:
        """``M[u, u s] = psi(s)``; symmetric because ``psi`` is."""
        group = self.ctx.group
        n = self.ctx.universe
        vertices = group.all_indices()
        steps = np.array(list(self.weights), dtype=np.int64)
        weights = np.array(list(self.weights.values()))
        rows = np.repeat(vertices, len(steps))
        cols = group.mul_indices(vertices[:, None], steps[None, :]).ravel()
        data = np.tile(weights, n)
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def step(self, distribution: FloatArray) -> FloatArray:
        return self.matrix @ distribution


@dataclass(frozen=True)
class WalkDistribution:
    probabilities: FloatArray
    steps: int
    start: int

    def __post_init__(self) -> None:
        if self.probabilities.min() < -1e-15 or abs(self.probabilities.sum() - 1) > 1e-12:
            raise ImplementationBugError("Walk distribution lost its mass.", steps=self.steps)

    def distance_to_uniform(self) -> float:
        return float(np.abs(self.probabilities - 1 / len(self.probabilities)).sum())


def walk_distribution(
    ctx: CayleyContext, n: int, start: Optional[SL2Elem] = None, cap: int = DEFAULT_BFS_CAP
) -> WalkDistribution:
    if n < 0:
        raise DomainError(f"Step count must be non-negative, got {n}.")
    ctx.check_cap(cap)
    group = ctx.group
    start_idx = group.identity_index if start is None else group.index(start)
    phi = np.zeros(ctx.universe)
    phi[start_idx] = 1.0
    kernel = LazyKernel(ctx)
    for _ in range(n):
        phi = kernel.step(phi)
    return WalkDistribution(phi, n, start_idx)


def mixing_time(ctx: CayleyContext, cap: int = DEFAULT_BFS_CAP, max_steps: int = POWER_ITERATION_CAP) -> int:
    """Least ``n`` with ``sum |phi_n - 1/|G|| <= 1/2``: doubling, then bisection."""
    ctx.check_cap(cap)
    ctx.require_generating()
    kernel = LazyKernel(ctx)
    phi = np.zeros(ctx.universe)
    phi[ctx.group.identity_index] = 1.0
    uniform = 1 / ctx.universe

    def distance(vector: FloatArray) -> float:
        return float(np.abs(vector - uniform).sum())

    def advance(vector: FloatArray, k: int) -> FloatArray:
        for _ in range(k):
            vector = kernel.step(vector)
        return vector

    lo, lo_phi, lo_dist = 0, phi, distance(phi)
    hi = 1
    while True:
        hi_phi = advance(lo_phi, hi - lo)
        hi_dist = distance(hi_phi)
        if hi_dist > lo_dist + 1e-12:
            raise ImplementationBugError("Distance to uniform increased.", n=hi)
        if hi_dist <= 0.5:
            break
        if hi >= max_steps:
            raise CapExceededError("Walk did not mix within the step cap.", steps=hi, distance=hi_dist)
        lo, lo_phi, lo_dist = hi, hi_phi, hi_dist
        hi = min(2 * hi, max_steps)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        mid_phi = advance(lo_phi, mid - lo)
        mid_dist = distance(mid_phi)
        if not hi_dist - 1e-12 <= mid_dist <= lo_dist + 1e-12:
            raise ImplementationBugError("Distance to uniform is not monotone.", n=mid)
        if mid_dist <= 0.5:
            hi, hi_dist = mid, mid_dist
        else:
            lo, lo_phi, lo_dist = mid, mid_phi, mid_dist
    logger.debug("mixing_time", p=ctx.p, n=hi, distance=hi_dist)
    return hi


def _gap_curves(p: int, gap: float) -> dict[str, float]:
    return {f"log_p^{k}": gap * math.log(p) ** k for k in (1, 2, 3)}


def spectral_gap(
    ctx: CayleyContext,
    method: Optional[str] = None,
    cap: int = DEFAULT_BFS_CAP,
    tol: float = POWER_ITERATION_TOL,
    max_iter: int = POWER_ITERATION_CAP,
) -> SpectralResult:
    """Second largest eigenvalue of the lazy transition operator."""
    ctx.check_cap(cap)
    method = method or ("dense" if ctx.universe <= DENSE_SPECTRAL_LIMIT else "power")
    kernel = LazyKernel(ctx)
    if method == "dense":
        if ctx.universe > DENSE_SPECTRAL_LIMIT:
            raise CapExceededError("Too large for a dense eigensolve.", order=ctx.universe)
        eigenvalues = scipy.linalg.eigh(kernel.matrix.toarray(), eigvals_only=True)
        if abs(eigenvalues[-1] - 1) > 1e-9:
            raise ImplementationBugError("Top eigenvalue is not 1.", top=float(eigenvalues[-1]))
        lambda2 = float(eigenvalues[-2])
        return SpectralResult(
            lambda2=lambda2, gap=1 - lambda2, method="dense", curves=_gap_curves(ctx.p, 1 - lambda2)
        )
    if method != "power":
        raise DomainError(f"Unknown method {method!r}.")
    rng = np.random.default_rng(0)
    x = rng.standard_normal(ctx.universe)
    x -= x.mean()
    x /= np.linalg.norm(x)
    residual = math.inf
    lam = 0.0
    for iteration in range(1, max_iter + 1):
        y = kernel.step(x)
        y -= y.mean()
        lam = float(x @ y)
        residual = float(np.linalg.norm(y - lam * x))
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        x = y / norm
        if residual <= tol:
            break
    else:
        raise ConvergenceError("Power iteration did not converge.", residual=residual, iterations=max_iter)
    return SpectralResult(
        lambda2=lam,
        gap=1 - lam,
        method="power",
        iterations=iteration,
        residual=residual,
        curves=_gap_curves(ctx.p, 1 - lam),
    )


# dense oracles


def _dense_adjacency(ctx: CayleyContext) -> scipy.sparse.csr_matrix:
    group = ctx.group
    vertices = group.all_indices()
    cols = group.mul_indices(vertices[:, None], ctx.steps[None, :]).ravel()
    rows = np.repeat(vertices, len(ctx.steps))
    return scipy.sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(ctx.universe,) * 2)


def dense_diameter(ctx: CayleyContext) -> int:
    """Diameter from all-pairs shortest paths."""
    distances = scipy.sparse.csgraph.shortest_path(_dense_adjacency(ctx), unweighted=True)
    if np.isinf(distances).any():
        raise HypothesisError("The Cayley graph is disconnected.")
    return int(distances.max())


def dense_mixing_time(ctx: CayleyContext, max_steps: int = 10**4) -> int:
    matrix = LazyKernel(ctx).matrix.toarray()
    phi = np.zeros(ctx.universe)
    phi[ctx.group.identity_index] = 1.0
    for n in range(1, max_steps + 1):
        phi = matrix @ phi
        if np.abs(phi - 1 / ctx.universe).sum() <= 0.5:
            return n
    raise CapExceededError("Dense walk did not mix.", steps=max_steps)


def dense_spectrum(ctx: CayleyContext) -> FloatArray:
    return scipy.linalg.eigh(LazyKernel(ctx).matrix.toarray(), eigvals_only=True)


# random generator pairs


def random_pairs(
    p: int,
    trials: int,
    seed: int,
    girth_len: Optional[int] = None,
    cap: int = DEFAULT_BFS_CAP,
    workers: Optional[int] = None,
) -> PairStats:
    group = sl2_group(p)
    girth_len = default_girth_length(p) if girth_len is None else girth_len

    def run(trial: int) -> PairRecord:
        rng = rngs[trial]
        g, h = group.random_element(rng), group.random_element(rng)
        ctx = CayleyContext.build(group, [g, h], cap)
        record = {"trial": trial, "g": list(g), "h": list(h), "generates": ctx.generates}
        if not ctx.generates:
            return PairRecord(**record, girth=None, diameter=None)
        return PairRecord(
            **record,
            girth=girth(ctx, girth_len, cap).girth,
            diameter=bfs_diameter(ctx, cap, workers=1).diameter,
        )

    rngs = trial_rngs(seed, trials)
    records = chunked_map(run, list(range(trials)), workers)
    return PairStats(p=p, girth_bound=girth_len, records=records)


# words over integer matrices

_INT64_SAFE = 2**62


def _int_inverse(m: IntMatrix) -> IntMatrix:
    a, b, c, d = m
    if a * d - b * c != 1:
        raise DomainError(f"{m} does not have determinant 1.")
    return d, -b, -c, a


def integer_word_value(generators: Sequence[IntMatrix], letters: Sequence[tuple[int, int]]) -> tuple[IntMatrix, bool]:
    """Evaluate ``(generator, ±1)`` letters over the integers.

    Runs in ``int64`` while the entries are provably below overflow and widens
    to Python integers otherwise; the flag says whether it widened.
    """
    mats = [tuple(g) for g in generators]
    inverses = [_int_inverse(g) for g in mats]  # type: ignore[arg-type]
    step_max = max(max(abs(v) for v in g) for g in mats)
    result = np.eye(2, dtype=np.int64)
    widened = False
    for k, sign in letters:
        m = mats[k] if sign > 0 else inverses[k]
        if not widened and int(np.abs(result).max()) * step_max * 2 >= _INT64_SAFE:
            result = result.astype(object)
            widened = True
        result = result @ np.array(m, dtype=result.dtype).reshape(2, 2)
    a, b, c, d = (int(v) for v in result.ravel())
    return (a, b, c, d), widened


def random_reduced_word(rng: np.random.Generator, n_generators: int, length: int) -> list[tuple[int, int]]:
    letters: list[tuple[int, int]] = []
    while len(letters) < length:
        k = int(rng.integers(n_generators))
        sign = 1 if rng.integers(2) else -1
        if letters and letters[-1] == (k, -sign):
            continue
        letters.append((k, sign))
    return letters


def free_word_check(
    generators: Sequence[IntMatrix], p: int, max_len: int, trials: int, seed: int = 0
) -> FreeWordReport:
    """Count reduced words that vanish mod ``p`` without vanishing over the integers."""
    if max_len < 1 or max_len > int(math.log2(p - 2)):
        raise DomainError(f"max_len must lie in [1, floor(log2(p - 2))], got {max_len}.", p=p)
    sl2_group(p)
    rng = np.random.default_rng(seed)
    violations = identities = widened = 0
    for _ in range(trials):
        letters = random_reduced_word(rng, len(generators), int(rng.integers(1, max_len + 1)))
        value, wide = integer_word_value(generators, letters)
        widened += wide
        if value == (1, 0, 0, 1):
            identities += 1
        elif all((v - e) % p == 0 for v, e in zip(value, (1, 0, 0, 1))):
            violations += 1
            logger.warning("free_word_violation", p=p, word=letters)
    return FreeWordReport(
        p=p,
        max_len=max_len,
        trials=trials,
        violations=violations,
        integer_identities=identities,
        widened=widened,
    )
