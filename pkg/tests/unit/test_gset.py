import numpy as np
import pytest

from sl2lab.constants import ContextMismatchError, DomainError, FixtureKind, HypothesisError, Storage
from sl2lab.gset import (
    GroupSet,
    ball,
    borel_subgroup,
    diagonal_torus,
    doubling_inequality,
    furcht_certificate,
    generates,
    pathological_fixtures,
    product_set,
    random_subset,
    require_generating,
    ruzsa_cover,
    ruzsa_distance,
    ruzsa_triangle,
    tripling_exponent,
)
from sl2lab.sl2 import sl2_group


def brute_product(A, B):
    group = A.group
    return {group.index(group.mul(g, h)) for g in A for h in B}


@pytest.fixture(params=[pytest.param(False, id="dense"), pytest.param(True, id="sparse")])
def storage(request, monkeypatch):
    if request.param:
        monkeypatch.setattr("sl2lab.gset.DENSE_STORAGE_LIMIT", 0)
    return request.param


def test_product_set_matches_brute_force(group7, rng, storage):
    for size_a, size_b in [(1, 5), (7, 3), (12, 12)]:
        A = random_subset(group7, size_a, rng)
        B = random_subset(group7, size_b, rng)
        assert set(product_set(A, B).to_json()) == brute_product(A, B)
        assert set((A * B).to_json()) == brute_product(A, B)


def test_product_set_parallel_matches_serial(group11, rng):
    A = random_subset(group11, 40, rng)
    B = random_subset(group11, 30, rng)
    assert product_set(A, B, workers=1) == product_set(A, B, workers=4)


def test_product_set_edge_cases(group5, rng):
    A = random_subset(group5, 10, rng)
    assert len(product_set(A, GroupSet(group5))) == 0
    big = random_subset(group5, 70, rng)
    assert product_set(big, big) == GroupSet.full(group5)


@pytest.mark.parametrize(
    ("p", "expected"),
    [
        pytest.param(409, Storage.DENSE, id="p409"),
        pytest.param(1021, Storage.DENSE, id="p1021"),
        pytest.param(1031, Storage.SPARSE, id="p1031"),
    ],
)
def test_storage_threshold(p, expected):
    # |SL_2(F_p)| crosses 2**30 between 1021 and 1031
    A = GroupSet(sl2_group(p), [0, 1, 2])
    assert A.storage is expected


def test_contains(group11, rng, storage):
    A = random_subset(group11, 3, rng)
    assert A.storage is (Storage.SPARSE if storage else Storage.DENSE)
    for g in A:
        assert g in A
    outside = GroupSet.full(group11).difference(A)
    assert not A.contains_indices(outside.indices).any()
    assert not GroupSet(group11).contains_indices(np.array([0, 1])).any()


def test_set_algebra(group5, rng):
    A = random_subset(group5, 30, rng)
    B = random_subset(group5, 30, rng)
    assert len(A.union(B)) + len(A.intersection(B)) == 60
    assert A.difference(B).union(A.intersection(B)) == A
    assert A.intersection(B).issubset(A)
    assert A.inverse().inverse() == A
    assert A.filter(np.zeros(len(A), dtype=bool)) == GroupSet(group5)


def test_context_mismatch(group5, group7):
    with pytest.raises(ContextMismatchError):
        GroupSet.full(group5).union(GroupSet.full(group7))
    with pytest.raises(ContextMismatchError):
        product_set(GroupSet.full(group5), GroupSet.full(group7))


def test_index_out_of_range(group5):
    with pytest.raises(DomainError):
        GroupSet(group5, [120])


def test_conjugate_keeps_traces(group7, rng):
    A = random_subset(group7, 20, rng)
    g = group7.random_element(rng)
    conjugate = A.conjugate(g)
    assert len(conjugate) == 20
    assert np.array_equal(conjugate.traces(), A.traces())


def test_serialization(group7, rng):
    A = random_subset(group7, 15, rng)
    data = A.to_bytes()
    assert len(data) == 8 * 16
    assert int.from_bytes(data[:8], "little") == 15
    assert GroupSet.from_bytes(group7, data) == A
    assert GroupSet.from_json(group7, A.to_json()) == A
    assert A.to_json() == sorted(A.to_json())
    with pytest.raises(DomainError):
        GroupSet.from_bytes(group7, data[:-8])


def test_ball_grows_to_the_group(group5):
    A = GroupSet.of(group5, group5.named_pair("offdiag1"))
    sizes = [len(ball(A, r)) for r in range(1, 21)]
    assert sizes[0] == 5
    assert sizes == sorted(sizes)
    assert sizes[-1] == group5.order
    assert ball(A, 20) is ball(A, 20)


def test_ball_matches_repeated_products(group7, rng):
    A = random_subset(group7, 3, rng)
    step = A.ball(1)
    expected = step
    for r in range(2, 5):
        expected = product_set(expected, step)
        assert A.ball(r) == expected


def test_ball_radius(group5):
    with pytest.raises(DomainError):
        ball(GroupSet.full(group5), 0)


def test_ball_of_subgroup_stabilizes(group7):
    H = borel_subgroup(group7)
    assert H.ball(5) == H
    assert H.ball(2) == H


def test_generates(group7):
    result = generates(GroupSet.of(group7, group7.named_pair("offdiag1")))
    assert result.generates is True
    assert result.decided
    torus = diagonal_torus(group7)
    result = generates(torus)
    assert result.generates is False
    assert result.closure == torus
    with pytest.raises(HypothesisError):
        require_generating(torus)


def test_generates_undecided(group7):
    result = generates(GroupSet.of(group7, group7.named_pair("offdiag1")), cap=10)
    assert result.generates is None
    assert not result.decided


def test_ruzsa_calculus(group7, rng):
    for _ in range(5):
        A, B, C = (random_subset(group7, int(n), rng) for n in rng.integers(2, 30, size=3))
        assert ruzsa_triangle(A, B, C).passed
        assert ruzsa_distance(A, A) >= 0
        assert doubling_inequality(A).passed
        cover = ruzsa_cover(A, B)
        assert cover.covers
        assert cover.bound.passed
        assert set(cover.representatives) <= set(A.to_json())


def test_ruzsa_distance_needs_elements(group5):
    with pytest.raises(DomainError):
        ruzsa_distance(GroupSet(group5), GroupSet.full(group5))


def test_borel_and_torus(group7):
    H = borel_subgroup(group7)
    assert len(H) == 7 * 6
    assert all(g.c == 0 for g in H)
    assert product_set(H, H) == H
    torus = diagonal_torus(group7)
    assert len(torus) == 6
    assert torus.issubset(H)


@pytest.mark.parametrize(
    ("kind", "extra"),
    [
        pytest.param(FixtureKind.COSET, 0, id="coset"),
        pytest.param(FixtureKind.SUBGROUP_PLUS_POINT, 1, id="subgroup plus point"),
    ],
)
def test_pathological_fixtures(kind, extra):
    group = sl2_group(7)
    A = pathological_fixtures(group, kind)
    assert len(A) == 7 * 6 + extra
    certificate = furcht_certificate(A)
    assert certificate.passed
    assert certificate.stage == "furcht"
    assert certificate.cardinalities["A"] == len(A)


def test_fixtures_need_p_at_least_five():
    with pytest.raises(DomainError):
        pathological_fixtures(sl2_group(3), FixtureKind.COSET)


def test_coset_does_not_triple(group7):
    coset = pathological_fixtures(group7, FixtureKind.COSET)
    assert len(product_set(coset, coset)) > len(coset)
    assert tripling_exponent(GroupSet.full(group7)) == 0


def test_furcht_random(group7, rng):
    assert furcht_certificate(random_subset(group7, 6, rng)).passed


def test_random_subset(group7, rng):
    A = random_subset(group7, 25, rng)
    assert len(A) == 25
