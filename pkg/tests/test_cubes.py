import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubelab.cubes import (
    CubeMorphism,
    NotAMorphism,
    Rule,
    SimplicialSet,
    T_set,
    Vertex,
    VertexMap,
    alpha,
    apply,
    compose,
    face,
    fold_flat,
    hom,
    identity,
    in_category,
    low_hull,
    projection,
    reflection,
    reflection_group,
    reflection_group_orbit,
    reflector,
    simplicial,
    standard,
    transposition,
)

V = Vertex.parse

PHI = CubeMorphism(2, 5, (Rule.const(0), Rule.coord(1), Rule.coord(2), Rule.const(1), Rule.coord(1)))
PHI_PRIME = CubeMorphism(2, 5, (Rule.const(0), Rule.coord(1), Rule.coord(1), Rule.const(1), Rule.coord(2)))


def morphisms(max_dim=3, cat="N"):
    return st.tuples(st.integers(0, max_dim), st.integers(0, max_dim)).flatmap(
        lambda nm: st.sampled_from(list(hom(nm[0], nm[1], cat)))
    )


def test_vertex_basics():
    v = V("101")
    assert v.n == 3 and v.bits == 0b101 and v.height == 2
    assert v.coords() == (1, 0, 1) and str(v) == "101"
    assert v.coord(1) == 1 and v.coord(2) == 0
    with pytest.raises(ValueError):
        Vertex(2, 4)
    with pytest.raises(ValueError):
        Vertex.of([0, 2])
    with pytest.raises(IndexError):
        v.coord(4)


def test_apply_examples():
    assert apply(identity(3), V("101")) == V("101")
    assert apply(PHI, V("10")) == V("01011")
    assert apply(reflection(2, 2), V("00")) == V("01")
    with pytest.raises(ValueError):
        apply(PHI, V("100"))


def test_category_examples():
    assert in_category(PHI, "N") and not in_category(PHI, "G")
    assert in_category(PHI_PRIME, "N") and in_category(PHI_PRIME, "G")
    xor = VertexMap(2, 1, (0, 1, 1, 0))
    conj = VertexMap(2, 1, (0, 0, 0, 1))
    assert not in_category(xor, "N") and not in_category(conj, "N")
    with pytest.raises(NotAMorphism):
        CubeMorphism.from_table(2, 1, xor.table)
    assert in_category(PHI.as_vertex_map(), "N") and not in_category(PHI.as_vertex_map(), "G")


def test_compose_examples():
    assert compose(identity(5), PHI) == PHI
    assert compose(reflection(2, 1), reflection(2, 1)).table == identity(2).table
    assert compose(projection(2, [1]), face(2, 2, 0)).table == identity(1).table


def test_standard_examples():
    assert apply(face(2, 1, 0), V("1")) == V("01")
    assert apply(alpha(1), V("0")) == V("10") and apply(alpha(1), V("1")) == V("01")
    s = simplicial(V("101"))
    assert s.n == 2 and apply(s, V("11")) == V("101")
    for kind, params in [("e", dict(n=3, i=2, j=1)), ("s", dict(v=V("0110"))), ("p", dict(n=3, T=[1, 3])), ("r", dict(n=3, i=2)), ("alpha", dict(n=2)), ("id", dict(n=2))]:
        assert in_category(standard(kind, **params), "G"), kind
    assert not in_category(transposition(3, 1, 2), "G") and in_category(transposition(3, 1, 2), "N")
    with pytest.raises(ValueError):
        face(2, 3, 0)
    with pytest.raises(ValueError):
        standard("zz", n=1)


def test_json_roundtrip():
    obj = PHI.to_json()
    assert obj == {"n": 2, "m": 5, "rules": [{"c": 0}, {"x": 1}, {"x": 2}, {"c": 1}, {"x": 1}]}
    assert CubeMorphism.from_json(obj) == PHI
    neg = reflection(2, 1)
    assert neg.to_json()["rules"][0] == {"nx": 1}
    assert CubeMorphism.from_json(neg.to_json()) == neg


def test_fold_flat_examples():
    assert fold_flat(2, V("1001"), "fold") == V("11")
    assert fold_flat(2, V("1001"), "flat") == V("01")
    assert fold_flat(1, V("00"), "fold") == V("0") and fold_flat(1, V("00"), "flat") == V("0")
    with pytest.raises(ValueError):
        fold_flat(1, V("11"), "fold")


@pytest.mark.parametrize("n", range(5))
def test_flat_inverts_alpha(n):
    # every pair (1 - x_i, x_i) sums to 1, so fold sends the whole image of alpha to 1^n
    for w in range(1 << n):
        image = apply(alpha(n), Vertex(n, w))
        assert fold_flat(n, image, "flat") == Vertex(n, w)
        assert fold_flat(n, image, "fold") == Vertex(n, (1 << n) - 1)


@pytest.mark.parametrize("n", range(1, 4))
def test_fold_after_simplicial_is_identity_on_maximal(n):
    T = T_set(n)
    maximal = T.maximal()
    assert sorted(maximal) == sorted(apply(alpha(n), Vertex(n, w)).bits for w in range(1 << n))
    for v in maximal:
        s = simplicial(Vertex(2 * n, v))
        assert s.n == n
        for u in range(1 << n):
            assert fold_flat(n, apply(s, Vertex(n, u)), "fold") == Vertex(n, u)


def test_simplicial_set_validation():
    assert len(T_set(1)) == 3
    with pytest.raises(ValueError):
        SimplicialSet(2, {3})


def test_reflection_group_orbit():
    assert reflection_group_orbit(2, V("01")) == {Vertex(2, b) for b in range(4)}
    assert reflection_group_orbit(0, Vertex(0, 0)) == {Vertex(0, 0)}
    g = reflector(3, V("010"))
    assert g.table == compose(reflection(3, 1), reflection(3, 3)).table
    assert apply(g, V("010")) == V("111")
    assert compose(g, g).table == identity(3).table
    assert len(reflection_group(3)) == 8


def test_low_hull():
    assert low_hull(3, 1) == [0, 1, 2, 4]
    assert len(low_hull(4, 2)) == 11


@given(morphisms(), st.data())
def test_compose_matches_pointwise(phi1, data):
    phi2 = data.draw(st.sampled_from(list(hom(phi1.m, data.draw(st.integers(0, 3)), "N"))))
    comp = compose(phi2, phi1)
    assert comp.table == tuple(phi2(phi1(v)) for v in range(1 << phi1.n))


@pytest.mark.parametrize("cat", ["N", "G"])
def test_category_closure_exhaustive(cat):
    homs = {(n, m): list(hom(n, m, cat)) for n in range(4) for m in range(4)}
    for n, m, k in itertools.product(range(4), repeat=3):
        for p1 in homs[(n, m)]:
            for p2 in homs[(m, k)]:
                assert in_category(compose(p2, p1), cat)


def test_n_dichotomy_exhaustive():
    for n, m in itertools.product(range(4), repeat=2):
        for phi in hom(n, m, "N"):
            injective = len(set(phi.table)) == len(phi.table)
            invariant = any(compose(phi, reflection(n, i)).table == phi.table for i in range(1, n + 1))
            assert injective or invariant


def test_g_membership_matches_rule():
    for phi in hom(3, 3, "N"):
        gamma = phi.gamma
        expected = all(gamma[j] == 0 or gamma[i] <= gamma[j] for i in range(3) for j in range(i + 1, 3))
        assert in_category(phi, "G") == expected


def test_hom_counts():
    # every output coordinate has 2 + 2n options in N
    for n, m in itertools.product(range(4), repeat=2):
        assert len(list(hom(n, m, "N"))) == (2 + 2 * n) ** m
