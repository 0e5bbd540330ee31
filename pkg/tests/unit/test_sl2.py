import numpy as np
import pytest

from sl2lab.constants import ConjTag, DomainError, EigenKind
from sl2lab.ffield import Fq2Elem
from sl2lab.sl2 import SL2Elem, conj_class_id, sl2_compose, sl2_eigen, sl2_group, sl2_index


@pytest.mark.parametrize(
    ("g", "h", "op", "result"),
    [
        pytest.param((1, 1, 0, 1), (1, 0, 1, 1), "mul", (2, 1, 1, 1), id="mul"),
        pytest.param((1, 1, 0, 1), None, "inv", (1, 6, 0, 1), id="inv"),
        pytest.param((2, 0, 0, 4), (1, 1, 0, 1), "conj", (2, 2, 0, 4), id="conj"),
    ],
)
def test_compose(group7, g, h, op, result):
    h = SL2Elem(*h) if h else None
    assert sl2_compose(group7, SL2Elem(*g), h, op) == SL2Elem(*result)


def test_compose_needs_operand(group7):
    with pytest.raises(DomainError):
        group7.compose(group7.identity, None, "mul")


def test_conjugation_keeps_trace(group11, rng):
    for _ in range(100):
        g, h = group11.random_element(rng), group11.random_element(rng)
        assert group11.trace(group11.conj(g, h)) == group11.trace(g)


def test_element_checks_determinant(group7):
    with pytest.raises(DomainError):
        group7.element(1, 1, 1, 1)
    assert group7.element(8, -1, 0, 1) == SL2Elem(1, 6, 0, 1)


@pytest.mark.parametrize("p", [pytest.param(3, id="p=3"), pytest.param(5, id="p=5"), pytest.param(7, id="p=7")])
def test_index_is_a_bijection(p):
    group = sl2_group(p)
    elements = [group.decode(i) for i in range(group.order)]
    assert len(set(elements)) == p * (p * p - 1)
    for i, g in enumerate(elements):
        assert (g.a * g.d - g.b * g.c) % p == 1
        assert sl2_index(group, g) == i


def test_index_of_identity(group11):
    assert group11.index(group11.identity) == group11.identity_index == 110


def test_decode_out_of_range(group5):
    with pytest.raises(DomainError):
        group5.decode(120)
    with pytest.raises(DomainError):
        group5.decode_array(np.array([-1]))


def test_vectorized_law_matches_scalar(group11, rng):
    x = rng.integers(0, group11.order, size=300)
    y = rng.integers(0, group11.order, size=300)
    products = group11.mul_indices(x, y)
    inverses = group11.inv_indices(x)
    traces = group11.trace_indices(x)
    for i, j, prod, inv, tr in zip(x, y, products, inverses, traces):
        g, h = group11.decode(int(i)), group11.decode(int(j))
        assert group11.decode(int(prod)) == group11.mul(g, h)
        assert group11.decode(int(inv)) == group11.inv(g)
        assert tr == group11.trace(g)
    a, b, c, d = group11.decode_array(x)
    assert np.array_equal(group11.index_array(a, b, c, d), x)


def test_power(group7, rng):
    g = group7.random_element(rng)
    assert group7.power(g, -1) == group7.inv(g)
    assert group7.power(g, 0) == group7.identity
    assert group7.power(g, 3) == group7.product([g, g, g])


def test_transpose_inverse_swaps_triangles(group7):
    assert group7.transpose_inverse(SL2Elem(1, 3, 0, 1)) == SL2Elem(1, 0, 4, 1)
    assert group7.transpose_inverse(SL2Elem(2, 5, 0, 4)) == SL2Elem(4, 0, 2, 2)


def test_eigen_random(group11, rng):
    fq2 = group11.fq2
    for _ in range(200):
        g = group11.random_element(rng)
        data = sl2_eigen(group11, g)
        lam1, lam2 = data.eigenvalues
        assert fq2.mul(lam1, lam2) == fq2.one
        assert fq2.add(lam1, lam2) == Fq2Elem(group11.trace(g), 0)
        for v in data.eigenvectors:
            assert group11.has_eigenvector(g, v)


@pytest.mark.parametrize(
    ("g", "kind"),
    [
        pytest.param((1, 0, 0, 1), EigenKind.CENTRAL, id="identity"),
        pytest.param((10, 0, 0, 10), EigenKind.CENTRAL, id="minus identity"),
        pytest.param((1, 1, 0, 1), EigenKind.PARABOLIC, id="unipotent"),
        pytest.param((2, 0, 0, 6), EigenKind.SPLIT, id="diagonal"),
        pytest.param((0, 10, 1, 0), EigenKind.NON_SPLIT, id="order four"),
    ],
)
def test_eigen_kind(group11, g, kind):
    assert group11.eigen(SL2Elem(*g)).kind is kind


def test_conjugacy_classes(group7, rng):
    ids = {conj_class_id(group7, group7.decode(i)) for i in range(group7.order)}
    assert len(ids) == 7 + 4
    for _ in range(200):
        g, h = group7.random_element(rng), group7.random_element(rng)
        assert group7.conj_class_id(group7.conj(g, h)) == group7.conj_class_id(g)


@pytest.mark.parametrize(
    ("g", "tag"),
    [
        pytest.param((1, 1, 0, 1), ConjTag.UNIPOTENT_RESIDUE, id="residue"),
        pytest.param((1, 3, 0, 1), ConjTag.UNIPOTENT_NON_RESIDUE, id="non-residue"),
        pytest.param((1, 0, 6, 1), ConjTag.UNIPOTENT_RESIDUE, id="lower, minus residue"),
        pytest.param((6, 0, 0, 6), ConjTag.CENTRAL, id="central"),
        pytest.param((2, 0, 0, 4), ConjTag.REGULAR, id="regular"),
    ],
)
def test_conj_class_tags(group7, g, tag):
    assert group7.conj_class_id(SL2Elem(*g)).tag is tag


@pytest.mark.parametrize(
    ("g", "size"),
    [
        pytest.param((1, 1, 0, 1), 14, id="unipotent"),
        pytest.param((2, 0, 0, 4), 6, id="split torus"),
        pytest.param((0, 6, 1, 0), 8, id="non-split torus"),
    ],
)
def test_centralizer(group7, g, size):
    g = SL2Elem(*g)
    centralizer = group7.centralizer(g)
    assert len(centralizer) == size
    for idx in centralizer:
        h = group7.decode(int(idx))
        assert group7.mul(g, h) == group7.mul(h, g)


def test_centralizer_of_central(group7):
    with pytest.raises(DomainError):
        group7.centralizer(group7.identity)


def test_parse(group7):
    assert group7.parse("1,1;0,1") == SL2Elem(1, 1, 0, 1)
    assert group7.parse(" -1,0;0,-1 ") == group7.minus_identity
    with pytest.raises(DomainError):
        group7.parse("1,1,0,1")
    with pytest.raises(DomainError):
        group7.parse("1,1;1,1")


def test_named_pairs(group7):
    x, y = group7.named_pair("offdiag3")
    assert (x, y) == (SL2Elem(1, 3, 0, 1), SL2Elem(1, 0, 3, 1))
    with pytest.raises(DomainError):
        group7.named_pair("offdiag9")


def test_offdiag1_relation(group7):
    x, y = group7.named_pair("offdiag1")
    y_inv = group7.inv(y)
    assert group7.product([x, y_inv, x]) == group7.product([y_inv, x, y_inv])


def test_apply_eigenvector(group11):
    g = SL2Elem(2, 0, 0, 6)
    fq2 = group11.fq2
    v = (fq2.one, fq2.zero)
    assert group11.apply(g, v) == (Fq2Elem(2, 0), fq2.zero)
    with pytest.raises(DomainError):
        group11.normalize((fq2.zero, fq2.zero))
