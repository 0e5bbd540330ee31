"""The lab's subcommands.

Every command emits one record per trial, ordered by prime and trial index,
and closes with a summary record. Lemma hypotheses that fail on a trial and
configured caps that are hit are recorded on that trial and do not stop the run.
"""
import math
from typing import Any, Callable, Literal, Optional

import numpy as np
import structlog
from sympy import primerange

from .borel import TrackedSet, attac_unipotents, factorize_many
from .cayley import (
    CayleyContext,
    bfs_diameter,
    dense_diameter,
    dense_mixing_time,
    dense_spectrum,
    free_word_check,
    girth,
    mixing_time,
    random_pairs,
    spectral_gap,
)
from .constants import (
    DEFAULT_BFS_CAP,
    DEFAULT_DEPTH_CAP,
    CapExceededError,
    CommandConfigError,
    ConvergenceError,
    DomainError,
    FixtureKind,
    HypothesisError,
)
from .gset import (
    GroupSet,
    borel_subgroup,
    furcht_certificate,
    generates,
    pathological_fixtures,
    product_set,
    random_subset,
    tripling_exponent,
)
from .growth import explicit_stages_pass, growth_certificate
from .models import (
    AttacRecord,
    CayleyRecord,
    FactorizeRecord,
    FixtureRecord,
    FreeWordRecord,
    GrowthRecord,
    Record,
    SorgeRecord,
    SummaryRecord,
    SumProductRecord,
)
from .parallel import chunked_map, trial_rngs
from .param_functions import Flag, Option
from .router import Router
from .sl2 import NAMED_PAIRS, SL2Elem, SL2Group, sl2_group
from .zpadd import ZpSet, additive_ruzsa_inequality, sorge_find_xi, sumproduct_stats

logger = structlog.get_logger(__name__)

router = Router()

# failures a trial records instead of aborting the run
TRIAL_ERRORS = (HypothesisError, CapExceededError, ConvergenceError)

Task = tuple[int, int, np.random.Generator]


def _primes(p: Optional[int], p_range: Optional[str]) -> list[int]:
    if (p is None) == (p_range is None):
        raise CommandConfigError("Give exactly one of --p and --p-range.")
    if p is not None:
        return [p]
    low, high = (int(bound) for bound in p_range.split(":"))  # type: ignore[union-attr]
    return [int(q) for q in primerange(max(low, 3), high + 1)]


def _tasks(p: Optional[int], p_range: Optional[str], trials: int, seed: int) -> list[Task]:
    """``(prime, trial, rng)``; the stream of a trial depends only on the seed and trial index."""
    return [
        (q, trial, rng)
        for q in _primes(p, p_range)
        for trial, rng in enumerate(trial_rngs(seed, trials))
    ]


def _generators(group: SL2Group, gens: str, rng: np.random.Generator) -> list[SL2Elem]:
    if gens == "random":
        return [group.random_element(rng), group.random_element(rng)]
    try:
        if gens in NAMED_PAIRS:
            return list(group.named_pair(gens))
        return [group.parse(literal) for literal in gens.split("/")]
    except DomainError as error:
        raise CommandConfigError(f"Bad generators {gens!r}: {error}") from error


def _integer_generators(gens: str) -> list[tuple[int, int, int, int]]:
    if gens in NAMED_PAIRS:
        return list(NAMED_PAIRS[gens])
    matrices = []
    for literal in gens.split("/"):
        try:
            a, b, c, d = (int(x) for row in literal.split(";") for x in row.split(","))
        except ValueError as error:
            raise CommandConfigError(f"Malformed matrix literal {literal!r}.") from error
        if a * d - b * c != 1:
            raise CommandConfigError(f"{literal!r} does not have determinant 1.")
        matrices.append((a, b, c, d))
    return matrices


def _error(error: Exception) -> str:
    return f"{type(error).__name__}: {error}"


def _trial_failed(command: str, p: int, trial: int, error: Exception) -> None:
    logger.warning(
        "trial_failed", command=command, p=p, trial=trial, error=type(error).__name__, message=str(error)
    )


def _summary(
    command: str, seed: int, records: list[Any], failures: int, stats: Optional[dict[str, float]] = None
) -> SummaryRecord:
    return SummaryRecord(
        command=command, seed=seed, records=len(records), failures=failures, stats=stats or {}
    )


def _value_stats(name: str, pairs: list[tuple[int, float]]) -> dict[str, float]:
    """Mean, min and max of ``name``, and its largest ratio to ``log p``."""
    if not pairs:
        return {}
    values = [value for _, value in pairs]
    return {
        f"{name}_mean": float(np.mean(values)),
        f"{name}_min": float(min(values)),
        f"{name}_max": float(max(values)),
        f"{name}_over_log_p_max": max(value / math.log(p) for p, value in pairs),
    }


def _cayley_sweep(
    command: str,
    field: str,
    p: Optional[int],
    p_range: Optional[str],
    gens: str,
    trials: int,
    seed: int,
    size_cap: Optional[int],
    measure: Callable[[CayleyContext], Any],
) -> list[Record]:
    cap = size_cap or DEFAULT_BFS_CAP

    def run(task: Task) -> CayleyRecord:
        q, trial, rng = task
        group = sl2_group(q)
        ctx = CayleyContext.build(group, _generators(group, gens, rng), cap)
        values: dict[str, Any] = {}
        if ctx.generates:
            try:
                values[field] = measure(ctx)
            except TRIAL_ERRORS as error:
                _trial_failed(command, q, trial, error)
        return CayleyRecord(p=q, trial=trial, generates=ctx.generates, seed=seed, **values)

    records = chunked_map(run, _tasks(p, p_range, trials, seed))
    measured = [(r.p, getattr(r, field)) for r in records if getattr(r, field) is not None]
    failures = len(records) - len(measured)
    return [*records, _summary(command, seed, records, failures, _value_stats(field, measured))]


@router.command()
def diameter(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    gens: str = Option("offdiag1", description="offdiag1, offdiag2, offdiag3, random, or literals a,b;c,d/..."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
    size_cap: Optional[int] = Option(None, ge=1, description="Largest group searched."),
    oracle: bool = Flag(description="Use the dense all-pairs oracle."),
) -> list[Record]:
    """Exact diameter of the Cayley graph by breadth-first search."""

    def measure(ctx: CayleyContext) -> int:
        if oracle:
            return dense_diameter(ctx)
        return bfs_diameter(ctx, size_cap or DEFAULT_BFS_CAP, workers=1).diameter

    return _cayley_sweep("diameter", "diameter", p, p_range, gens, trials, seed, size_cap, measure)


@router.command("girth")
def girth_command(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    gens: str = Option("offdiag1", description="offdiag1, offdiag2, offdiag3, random, or literals a,b;c,d/..."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
    size_cap: Optional[int] = Option(None, ge=1, description="Largest group searched."),
    max_len: Optional[int] = Option(None, ge=1, description="Longest relation searched for."),
) -> list[Record]:
    """Length of the shortest nontrivial relation among the generators."""

    def measure(ctx: CayleyContext) -> Optional[int]:
        return girth(ctx, max_len, size_cap or DEFAULT_BFS_CAP).girth

    return _cayley_sweep("girth", "girth", p, p_range, gens, trials, seed, size_cap, measure)


@router.command()
def mixing(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    gens: str = Option("offdiag1", description="offdiag1, offdiag2, offdiag3, random, or literals a,b;c,d/..."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
    size_cap: Optional[int] = Option(None, ge=1, description="Largest group walked on."),
    oracle: bool = Flag(description="Use dense transition-matrix powers."),
) -> list[Record]:
    """Steps until the lazy walk from the identity is within 1/2 of uniform in L1."""

    def measure(ctx: CayleyContext) -> int:
        if oracle:
            return dense_mixing_time(ctx)
        return mixing_time(ctx, size_cap or DEFAULT_BFS_CAP)

    return _cayley_sweep("mixing", "mixing_n", p, p_range, gens, trials, seed, size_cap, measure)


@router.command()
def spectral(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    gens: str = Option("offdiag1", description="offdiag1, offdiag2, offdiag3, random, or literals a,b;c,d/..."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
    size_cap: Optional[int] = Option(None, ge=1, description="Largest group handled."),
    method: Optional[Literal["dense", "power"]] = Option(None, description="Eigensolver; chosen by size if omitted."),
    oracle: bool = Flag(description="Use the full dense spectrum."),
) -> list[Record]:
    """Second largest eigenvalue of the lazy walk operator."""

    def measure(ctx: CayleyContext) -> float:
        if oracle:
            return float(dense_spectrum(ctx)[-2])
        return spectral_gap(ctx, method, size_cap or DEFAULT_BFS_CAP).lambda2

    return _cayley_sweep("spectral", "lambda2", p, p_range, gens, trials, seed, size_cap, measure)


@router.command()
def growth(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    random_sets: int = Option(1, ge=1, description="Number of random sets."),
    size: int = Option(10, ge=2, description="Size of each random set."),
    seed: int = Option(0, ge=0),
    delta: float = Option(0.1, gt=0, lt=3),
    depth_cap: int = Option(DEFAULT_DEPTH_CAP, ge=1),
) -> list[Record]:
    """Certificate chain of the growth pipeline on random sets."""

    def run(task: Task) -> GrowthRecord:
        q, trial, rng = task
        group = sl2_group(q)
        if size > group.order:
            raise CommandConfigError(f"--size {size} exceeds |SL_2(F_{q})| = {group.order}.")
        A = random_subset(group, size, rng)
        record = {"p": q, "trial": trial, "seed": seed, "size": size}
        try:
            chain = growth_certificate(A, delta, depth_cap)
        except TRIAL_ERRORS as error:
            _trial_failed("growth", q, trial, error)
            return GrowthRecord(**record, passed=False, error=_error(error))
        return GrowthRecord(**record, passed=explicit_stages_pass(chain), chain=chain)

    records = chunked_map(run, _tasks(p, p_range, random_sets, seed))
    failures = sum(not r.passed for r in records)
    stats = {"passed_fraction": (len(records) - failures) / len(records)} if records else {}
    return [*records, _summary("growth", seed, records, failures, stats)]


@router.command()
def sumproduct(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    size: int = Option(10, ge=2, description="Size of each random subset of F_p^*."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
) -> list[Record]:
    """Sizes of A + A and A A for random subsets of F_p^*."""

    def run(task: Task) -> SumProductRecord:
        q, trial, rng = task
        if size > q - 1:
            raise CommandConfigError(f"--size {size} exceeds |F_{q}^*|.")
        A = ZpSet(q, rng.choice(np.arange(1, q), size=size, replace=False))
        return SumProductRecord(
            p=q, trial=trial, seed=seed, stats=sumproduct_stats(A), ruzsa=additive_ruzsa_inequality(A)
        )

    records = chunked_map(run, _tasks(p, p_range, trials, seed))
    exponents = [r.stats.exponent for r in records]
    stats = {"exponent_min": min(exponents), "exponent_mean": float(np.mean(exponents))}
    return [*records, _summary("sumproduct", seed, records, 0, stats)]


@router.command()
def sorge(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    size_a: int = Option(10, ge=1, description="Size of the random set A."),
    size_s: int = Option(10, ge=1, description="Size of the random set S of dilates."),
    c: float = Option(1.0, gt=0, le=1, description="Fraction of the bound a hit must reach."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
) -> list[Record]:
    """Best dilate xi in S for |A + xi A| and the number of near-best dilates."""

    def run(task: Task) -> SorgeRecord:
        q, trial, rng = task
        if size_a > q or size_s > q - 1:
            raise CommandConfigError(f"Set sizes exceed F_{q}.")
        A = ZpSet(q, rng.choice(q, size=size_a, replace=False))
        S = ZpSet(q, rng.choice(np.arange(1, q), size=size_s, replace=False))
        try:
            _, certificate = sorge_find_xi(A, S, c)
        except HypothesisError as error:
            _trial_failed("sorge", q, trial, error)
            return SorgeRecord(p=q, trial=trial, seed=seed, error=_error(error))
        return SorgeRecord(p=q, trial=trial, seed=seed, certificate=certificate)

    records = chunked_map(run, _tasks(p, p_range, trials, seed))
    failures = sum(r.error is not None for r in records)
    return [*records, _summary("sorge", seed, records, failures)]


@router.command()
def attac(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    size: Optional[int] = Option(None, ge=1, description="Size of the random upper-triangular set; all of them if omitted."),
    trials: int = Option(1, ge=1),
    seed: int = Option(0, ge=0),
    force: bool = Flag(description="Run below the size threshold."),
) -> list[Record]:
    """Words of bounded length for every upper unipotent, from a large upper-triangular set."""

    def run(task: Task) -> AttacRecord:
        q, trial, rng = task
        group = sl2_group(q)
        H = borel_subgroup(group)
        n = len(H) if size is None else size
        if n > len(H):
            raise CommandConfigError(f"--size {n} exceeds the {len(H)} upper-triangular elements.")
        A = GroupSet(group, rng.choice(H.indices, size=n, replace=False))
        try:
            unipotents = attac_unipotents(TrackedSet.of_source(A), force)
        except HypothesisError as error:
            _trial_failed("attac", q, trial, error)
            return AttacRecord(p=q, trial=trial, seed=seed, size=n, error=_error(error))
        return AttacRecord(
            p=q,
            trial=trial,
            seed=seed,
            size=n,
            unipotents=len(unipotents),
            max_word_len=max(len(word) for word in unipotents.words.values()),
        )

    records = chunked_map(run, _tasks(p, p_range, trials, seed))
    failures = sum(r.error is not None for r in records)
    return [*records, _summary("attac", seed, records, failures)]


@router.command()
def factorize(
    p: int = Option(description="Prime modulus."),
    density: float = Option(1.0, gt=0, le=1, description="Each element joins A with this probability."),
    targets: int = Option(10, ge=1, description="Number of random elements to factorize."),
    seed: int = Option(0, ge=0),
    force: bool = Flag(description="Run below the size threshold."),
) -> list[Record]:
    """Words of length at most 64 over a very large random set A."""
    group = sl2_group(p)
    rng = np.random.default_rng(seed)
    A = GroupSet(group, group.all_indices()[rng.random(group.order) < density])
    goals = [group.random_element(rng) for _ in range(targets)]
    try:
        words = factorize_many(A, goals, force)
    except HypothesisError as error:
        _trial_failed("factorize", p, 0, error)
        records = [
            FactorizeRecord(p=p, trial=trial, seed=seed, target=str(g), error=_error(error))
            for trial, g in enumerate(goals)
        ]
        return [*records, _summary("factorize", seed, records, len(records))]
    records = [
        FactorizeRecord(p=p, trial=trial, seed=seed, target=str(g), length=len(word), word=word)
        for trial, (g, word) in enumerate(zip(goals, words))
    ]
    stats = {"set_size": float(len(A)), "max_length": float(max(len(word) for word in words))}
    return [*records, _summary("factorize", seed, records, 0, stats)]


@router.command("random-pairs")
def random_pairs_command(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    trials: int = Option(10, ge=1),
    seed: int = Option(0, ge=0),
    girth_len: Optional[int] = Option(None, ge=1, description="Short-loop threshold; floor(log p / (2 log 4)) if omitted."),
) -> list[Record]:
    """Generation, girth and diameter for random pairs of elements."""
    records: list[CayleyRecord] = []
    stats: dict[str, float] = {}
    for q in _primes(p, p_range):
        pairs = random_pairs(q, trials, seed, girth_len)
        records += [
            CayleyRecord(
                p=q,
                trial=pair.trial,
                generates=pair.generates,
                girth=pair.girth,
                diameter=pair.diameter,
                seed=seed,
            )
            for pair in pairs.records
        ]
        stats[f"p{q}_generating_fraction"] = pairs.generating_fraction
        stats[f"p{q}_short_loop_fraction"] = pairs.short_loop_fraction
    failures = sum(not r.generates for r in records)
    return [*records, _summary("random-pairs", seed, records, failures, stats)]


@router.command()
def freewords(
    p: Optional[int] = Option(None, description="Prime modulus."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    gens: str = Option("offdiag3", description="offdiag1, offdiag2, offdiag3 or integer literals a,b;c,d/..."),
    max_len: Optional[int] = Option(None, ge=1, description="Longest word; floor(log2(p - 2)) if omitted."),
    trials: int = Option(1000, ge=1),
    seed: int = Option(0, ge=0),
) -> list[Record]:
    """Random reduced words that collapse mod p, and words trivial over the integers."""
    if gens == "random":
        raise CommandConfigError("freewords needs integer generators.")
    generators = _integer_generators(gens)
    records = []
    for q in _primes(p, p_range):
        length = max_len or int(math.log2(q - 2))
        try:
            report = free_word_check(generators, q, length, trials, seed)
        except DomainError as error:
            raise CommandConfigError(str(error)) from error
        records.append(FreeWordRecord(seed=seed, report=report))
    failures = sum(r.report.violations > 0 for r in records)
    return [*records, _summary("freewords", seed, records, failures)]


@router.command()
def fixtures(
    p: Optional[int] = Option(None, description="Prime modulus, at least 5."),
    p_range: Optional[str] = Option(None, metavar="A:B", description="Sweep the primes in [A, B]."),
    kind: Literal["coset", "subgroup_plus_point"] = Option("coset", description="Which slowly growing set."),
) -> list[Record]:
    """Growth measurements on sets that triple slowly yet do not grow under products."""
    records = []
    for q in _primes(p, p_range):
        group = sl2_group(q)
        try:
            A = pathological_fixtures(group, FixtureKind(kind))
        except DomainError as error:
            raise CommandConfigError(str(error)) from error
        AA = product_set(A, A)
        records.append(
            FixtureRecord(
                p=q,
                kind=kind,
                size=len(A),
                generates=generates(A).generates,
                product_size=len(AA),
                triple_size=len(product_set(AA, A)),
                tripling_exponent=tripling_exponent(A),
                furcht=furcht_certificate(A),
            )
        )
    failures = sum(not r.furcht.passed for r in records)
    return [*records, _summary("fixtures", 0, records, failures)]
