import math
from fractions import Fraction

import numpy as np
import pytest

from sl2lab.constants import ContextMismatchError, DomainError, ExpanderKind, HypothesisError
from sl2lab.ffield import Fq2Elem, PackedField
from sl2lab.zpadd import (
    MulBall,
    ZpSet,
    additive_ruzsa_distance,
    additive_ruzsa_inequality,
    convolve,
    expander_sets,
    fourier,
    sorge_find_xi,
    sumproduct_stats,
    sumset,
    w_identity_holds,
)


def random_zpset(p, size, rng, degree=1, nonzero=False):
    low = 1 if nonzero else 0
    return ZpSet(p, rng.choice(np.arange(low, p**degree), size=size, replace=False), degree)


def test_members_are_reduced_and_sorted():
    A = ZpSet(7, [9, 2, 16, -1])
    assert list(A) == [2, 6]
    assert 9 in A
    assert len(A) == 2


@pytest.mark.parametrize(
    ("left", "right", "expected"),
    [
        pytest.param([0, 1], [0, 1], [0, 1, 2], id="interval"),
        pytest.param([5, 6], [3], [1, 2], id="wraps"),
        pytest.param([], [1, 2], [], id="empty"),
    ],
)
def test_sumset(left, right, expected):
    assert list(sumset(ZpSet(7, left), ZpSet(7, right))) == expected


def test_convolve_counts_representations(rng):
    p = 13
    A = random_zpset(p, 5, rng)
    B = random_zpset(p, 4, rng)
    counts = convolve(A, B)
    assert counts.sum() == len(A) * len(B)
    for x in range(p):
        assert counts[x] == sum(1 for a in A for b in B if (a + b) % p == x)
    assert set(np.flatnonzero(counts)) == set(A.sumset(B))


def test_convolve_rejects_extension():
    A = ZpSet(5, [1, 6], degree=2)
    with pytest.raises(DomainError):
        convolve(A, A)


def test_fourier_parseval(rng):
    A = random_zpset(11, 4, rng)
    f_hat = fourier(A.indicator())
    assert np.isclose(f_hat[0].real, 4)
    assert np.isclose(np.sum(np.abs(f_hat) ** 2), 11 * 4)


def test_context_mismatch():
    with pytest.raises(ContextMismatchError):
        ZpSet(5, [1]).sumset(ZpSet(7, [1]))
    with pytest.raises(ContextMismatchError):
        ZpSet(5, [1]).sumset(ZpSet(5, [1], degree=2))


def test_additive_ruzsa(rng):
    for size in (2, 5, 9):
        A = random_zpset(17, size, rng)
        assert additive_ruzsa_distance(A, A) >= 0
        assert additive_ruzsa_inequality(A).passed
    with pytest.raises(DomainError):
        additive_ruzsa_distance(ZpSet(5), ZpSet(5, [1]))


def test_dilate_and_inverse():
    A = ZpSet(7, [1, 2, 3])
    assert list(A.dilate(3)) == [2, 3, 6]
    assert list(A.inverse()) == [1, 4, 5]
    assert list(A.negate()) == [4, 5, 6]
    assert list(A.difference_set(A)) == [0, 1, 2, 5, 6]
    assert list(ZpSet(7, [0, 3]).without_zero()) == [3]


def test_sumproduct_stats():
    stats = sumproduct_stats(ZpSet(7, [1, 2, 3]))
    assert stats.sumset == 5
    assert stats.productset == 5
    assert math.isclose(stats.exponent, math.log(5) / math.log(3) - 1)


@pytest.mark.parametrize(
    "members",
    [pytest.param([1], id="single"), pytest.param([0, 1, 2], id="contains zero")],
)
def test_sumproduct_stats_rejects(members):
    with pytest.raises(DomainError):
        sumproduct_stats(ZpSet(7, members))


def test_sorge_picks_smallest_maximizer():
    p = 11
    A = ZpSet(p, [0, 1, 2])
    S = ZpSet(p, range(1, p))
    xi, certificate = sorge_find_xi(A, S)
    sizes = {x: len(A.sumset(A.dilate(x))) for x in S}
    assert certificate.dilate_sum == max(sizes.values())
    assert xi == min(x for x, size in sizes.items() if size == certificate.dilate_sum)
    assert certificate.xi == xi
    assert certificate.c == "1"
    assert certificate.scaled_hits_bound.passed


def test_sorge_bound_on_large_set():
    p = 13
    xi, certificate = sorge_find_xi(ZpSet(p, range(1, p)), ZpSet(p, [2, 5]), Fraction(1, 2))
    assert certificate.dilate_sum == p
    assert certificate.bound.passed
    assert certificate.scaled_hits == 2
    assert certificate.scaled_hits_bound.passed
    assert xi == 2


@pytest.mark.parametrize(
    ("A", "S", "c", "error"),
    [
        pytest.param(ZpSet(7, [1]), ZpSet(7, [0, 1]), 1, HypothesisError, id="zero dilate"),
        pytest.param(ZpSet(7), ZpSet(7, [1]), 1, HypothesisError, id="empty"),
        pytest.param(ZpSet(7, [1]), ZpSet(7, [1]), 0, DomainError, id="c zero"),
        pytest.param(ZpSet(7, [1]), ZpSet(7, [1]), 1.5, DomainError, id="c too large"),
        pytest.param(ZpSet(7, [1]), ZpSet(11, [1]), 1, ContextMismatchError, id="mixed primes"),
    ],
)
def test_sorge_rejects(A, S, c, error):
    with pytest.raises(error):
        sorge_find_xi(A, S, c)


def test_mul_ball():
    # 2 has order 3 mod 7, 3 is a primitive root
    assert len(MulBall(ZpSet(7, [2]), 1)) == 3
    assert len(MulBall(ZpSet(7, [2]), 5)) == 3
    assert list(MulBall(ZpSet(7, [3]), 6).members) == [1, 2, 3, 4, 5, 6]
    with pytest.raises(DomainError):
        MulBall(ZpSet(7, [0, 1]), 2)
    with pytest.raises(DomainError):
        MulBall(ZpSet(7, [1]), 0)


@pytest.mark.parametrize("degree", [pytest.param(1, id="prime"), pytest.param(2, id="quadratic")])
def test_w_identity(degree, rng):
    field = PackedField(11, degree)
    x = rng.integers(1, field.q, size=200)
    y = rng.integers(1, field.q, size=200)
    assert w_identity_holds(field, x, y).all()


def test_amtar_image_matches_brute_force():
    p = 13
    ball = MulBall(ZpSet(p, [2, 5]), 2)
    image, record = expander_sets(ball, ExpanderKind.AMTAR)
    inv = {x: pow(x, -1, p) for x in ball.members}
    expected = {(x + inv[x]) * (y + inv[y]) % p for x in ball.members for y in ball.members}
    assert set(image) == expected
    assert record.image_size == len(expected)
    assert record.ball_size == len(ball)
    assert record.base_size == 2
    assert record.kind == "amtar"


def test_corz_with_unit_coefficients_is_amtar(rng):
    p = 7
    field = PackedField(p, 2)
    ball = MulBall(ZpSet(p, rng.choice(np.arange(1, p * p), size=3, replace=False), 2), 2)
    one = Fq2Elem(1, 0)
    amtar, _ = expander_sets(ball, ExpanderKind.AMTAR)
    corz, record = expander_sets(ball, ExpanderKind.CORZ, one, one)
    assert corz == amtar
    assert record.q == field.q


def test_corz_needs_coefficients():
    ball = MulBall(ZpSet(7, [3]), 1)
    with pytest.raises(DomainError):
        expander_sets(ball, ExpanderKind.CORZ, Fq2Elem(1, 0), None)
    with pytest.raises(DomainError):
        expander_sets(ball, ExpanderKind.CORZ, Fq2Elem(1, 0), Fq2Elem(0, 0))
