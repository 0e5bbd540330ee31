import pytest

from sl2lab.borel import (
    ATTAC_WORD_BOUND,
    FACTORIZE_WORD_BOUND,
    BorelElem,
    Factorizer,
    TrackedSet,
    attac_threshold,
    attac_unipotents,
    factorize,
    factorize_many,
    factorize_threshold,
    lower_unipotent,
    lu_decompose,
    unipotent,
)
from sl2lab.constants import DomainError, HypothesisError
from sl2lab.gset import GroupSet, borel_subgroup
from sl2lab.sl2 import sl2_group


@pytest.mark.parametrize(
    ("p", "attac", "factorize_bound"),
    [
        pytest.param(5, 30, 438, id="p5"),
        pytest.param(7, 52, 1075, id="p7"),
        pytest.param(11, 109, 3590, id="p11"),
    ],
)
def test_thresholds(p, attac, factorize_bound):
    assert attac_threshold(p) == attac
    assert factorize_threshold(p) == factorize_bound


def test_borel_elem(group7):
    g = group7.element(3, 4, 0, 5)
    assert BorelElem.from_elem(g) == BorelElem(3, 4)
    assert BorelElem(3, 4).to_elem(group7) == g
    with pytest.raises(DomainError):
        BorelElem.from_elem(group7.element(1, 0, 1, 1))


def test_transpose_inverse_swaps_unipotents(group7):
    for y in range(7):
        assert group7.transpose_inverse(lower_unipotent(group7, y)) == unipotent(group7, -y % 7)


def check_unipotents(group, tracked):
    p = group.p
    assert len(tracked) == p
    assert {tracked.key_of(word.evaluate()) for word in tracked.words.values()} == {
        group.index(unipotent(group, x)) for x in range(p)
    }
    assert all(len(word) <= ATTAC_WORD_BOUND for word in tracked.words.values())


def test_attac_on_the_borel_subgroup(group11):
    tracked = attac_unipotents(TrackedSet.of_source(borel_subgroup(group11)))
    check_unipotents(group11, tracked)
    assert all(check.passed for check in tracked.checks)


def test_attac_on_a_subset_above_threshold():
    group = sl2_group(13)
    borel = borel_subgroup(group)
    A = GroupSet(group, borel.indices[: attac_threshold(13) + 1])
    check_unipotents(group, attac_unipotents(TrackedSet.of_source(A)))


def test_attac_on_lower_triangular_sets(group11):
    lower = GroupSet.of(group11, [group11.transpose_inverse(g) for g in borel_subgroup(group11)])
    assert all(g.b == 0 for g in lower)
    tracked = attac_unipotents(TrackedSet.of_source(lower, twisted=True))
    assert tracked.twisted
    check_unipotents(group11, tracked)
    for y in range(11):
        word = tracked.words[group11.index(unipotent(group11, -y % 11))]
        assert word.evaluate() == lower_unipotent(group11, y)


def test_attac_threshold_is_enforced(group7):
    tracked = TrackedSet.of_source(borel_subgroup(group7))
    with pytest.raises(HypothesisError):
        attac_unipotents(tracked)
    check_unipotents(group7, attac_unipotents(tracked, force=True))


def test_lu_decompose(group11, rng):
    for _ in range(50):
        g = group11.random_element(rng)
        y, x, y2, x2 = lu_decompose(group11, g)
        factors = [
            lower_unipotent(group11, y),
            unipotent(group11, x),
            lower_unipotent(group11, y2),
            unipotent(group11, x2),
        ]
        assert group11.product(factors) == g


@pytest.fixture(scope="module")
def punctured():
    group = sl2_group(11)
    targets = [group.element(2, 3, 5, 8), group.element(0, 1, 10, 0), group.element(3, 0, 0, 4)]
    full = GroupSet.full(group)
    return full.difference(GroupSet.of(group, targets)), targets


def test_factorizer(punctured):
    A, targets = punctured
    factorizer = Factorizer(A, force=True)
    for target in targets:
        word = factorizer.factorize(target)
        assert word.evaluate() == target
        assert len(word) <= FACTORIZE_WORD_BOUND
        assert word.context_hash == A.context_hash


def test_factorize_members_directly(punctured):
    A, _ = punctured
    g = next(iter(A))
    word = factorize(A, g)
    assert len(word) == 1
    assert word.evaluate() == g


def test_factorize_many_keeps_order(punctured):
    A, targets = punctured
    words = factorize_many(A, targets, force=True, workers=2)
    assert [word.evaluate() for word in words] == targets


def test_factorizer_threshold(punctured):
    A, targets = punctured
    with pytest.raises(HypothesisError):
        Factorizer(A)
    with pytest.raises(HypothesisError):
        factorize(A, targets[0])


def test_small_sets_fail_even_when_forced(group7):
    with pytest.raises(HypothesisError):
        Factorizer(GroupSet.full(group7), force=True)


@pytest.mark.slow
def test_factorize_at_251():
    group = sl2_group(251)
    full = GroupSet.full(group)
    targets = [group.element(2, 3, 5, 8), group.element(7, 1, 250, 0)]
    A = full.difference(GroupSet.of(group, targets))
    assert len(A) > factorize_threshold(251)
    for word, target in zip(factorize_many(A, targets), targets):
        assert word.evaluate() == target
        assert len(word) <= FACTORIZE_WORD_BOUND
