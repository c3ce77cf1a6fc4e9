import itertools
import json

import numpy as np
import pytest

from cubelab.algebra import (
    ClassificationError,
    abelian_structure,
    action_by_class,
    approx_classes,
    check_axioms,
    compose_cubes,
    composable,
    composable_partner,
    fiber_action,
    fibers,
    find_nilspace_witness,
    quotient_structure,
    recover_abelian,
    recover_group,
    sim_relation,
    structure_tower,
    verify_fiber_action,
)
from cubelab.cubes import reflection, transposition
from cubelab.groups import cyclic, dihedral, direct_product, is_isomorphic, quaternion8, symmetric
from cubelab.structures import D1, Dk, HZk, Stored, pull


@pytest.fixture(scope="module")
def hzq8():
    G = quaternion8()
    return HZk(G, G.center(), 2)


# axioms


def test_axioms_d1_and_dk():
    rep = check_axioms(D1(symmetric(3)), 3)
    assert rep.ok and rep.step == 1 and rep.k_ergodic == 1
    rep = check_axioms(Dk(cyclic(2), 2), 3)
    assert rep.ok and rep.step == 2 and rep.k_ergodic == 2
    assert all(v is not False for v in rep.cross_checks.values())
    json.dumps(rep.to_json())


def test_missing_cube_breaks_completion():
    X = D1(cyclic(2))
    cubes = {n: X.cube_array(n).tolist() for n in range(4)}
    removed = cubes[2].pop(5)
    bad = Stored(2, cubes, 3)
    rep = check_axioms(bad, 3)
    assert not rep.ok
    witness = rep.completion[2]["witness"]
    assert witness["axiom"] == "completion" and witness["corner"] == removed[:3]


def test_step_above_cap_is_reported():
    rep = check_axioms(Dk(cyclic(2), 3), 3)
    assert rep.step is None and rep.to_json()["step"] == "above cap"


def test_nilspace_witness_dihedral12():
    G = dihedral(6)
    X = HZk(G, G.center(), 2)
    w = find_nilspace_witness(X, 2)
    assert w is not None and w["category"] == "N"
    c, pulled = w["cube"], w["pullback"]
    assert X.contains(c) and not X.contains(pulled)
    t = transposition(2, 1, 2)
    assert tuple(pulled) == pull(c, t)
    assert check_axioms(X, 3).ok


def test_no_nilspace_witness_for_q8(hzq8):
    # [Q8, Q8] lies in the centre, so the structure is closed under every N-morphism
    assert find_nilspace_witness(hzq8, 3) is None


# composition


def test_compose_examples():
    X = D1(cyclic(4))
    assert compose_cubes(X, (0, 1), (1, 3), 1) == (0, 3)
    with pytest.raises(ValueError):
        compose_cubes(X, (0, 1), (2, 3), 1)
    c = (1, 2, 3, 0)
    for j in (1, 2):
        d = compose_cubes(X, c, pull(c, reflection(2, j)), j)
        assert pull(d, reflection(2, j)) == d
    c1, c2, c3 = (0, 1, 2, 3), (1, 3, 3, 1), (3, 2, 1, 0)
    assert composable(c1, c2, 1) and composable(c2, c3, 1)
    left = compose_cubes(X, compose_cubes(X, c1, c2, 1), c3, 1)
    right = compose_cubes(X, c1, compose_cubes(X, c2, c3, 1), 1)
    assert left == right


def test_composition_respects_approx():
    X = Dk(cyclic(2), 2)
    C = [tuple(c) for c in X.cube_array(2).tolist()]
    for i in (1, 2, 3):
        cls = approx_classes(X, 2, i).labels
        for j in (1, 2):
            seen = {}
            for a, b in itertools.product(range(len(C)), repeat=2):
                if composable(C[a], C[b], j):
                    r = C.index(compose_cubes(X, C[a], C[b], j))
                    key = (cls[a], cls[b])
                    assert seen.setdefault(key, cls[r]) == cls[r]


def test_composable_partner_uses_reflection():
    X = Dk(cyclic(3), 2)
    labels = np.asarray(approx_classes(X, 2, 1).labels)
    C = X.cube_array(2)
    c = tuple(C[7].tolist())
    for target in range(labels.max() + 1):
        d = composable_partner(X, c, target, labels, 1)
        assert composable(c, d, 1) and labels[X.cube_array(2).tolist().index(list(d))] == target


# relations


def test_approx_examples():
    X = Dk(cyclic(2), 2)
    P = approx_classes(X, 2, 1)
    assert P.num_classes == 2
    C = X.cube_array(2)
    parity = (C[:, 0] + C[:, 1] + C[:, 2] + C[:, 3]) % 2
    assert all((P.labels[a] == P.labels[b]) == (parity[a] == parity[b]) for a in range(16) for b in range(16))

    G = symmetric(3)
    Y = D1(G)
    P = approx_classes(Y, 1, 1)
    C1 = Y.cube_array(1).tolist()
    for (a, b), (c, d) in itertools.product(C1, repeat=2):
        same = P.labels[C1.index([a, b])] == P.labels[C1.index([c, d])]
        # face x1 = 0 holds (a, b), face x1 = 1 holds (c, d)
        assert same == (d == G.mul(G.mul(c, G.inverse(a)), b))


def test_sim_examples(hzq8):
    X = D1(symmetric(3))
    assert sim_relation(X, 0).num_classes == 1
    assert sim_relation(X, 1).num_classes == 6
    G = hzq8.G
    assert sorted(sim_relation(hzq8, 1).classes()) == sorted(G.cosets(G.center()))
    assert sim_relation(Dk(cyclic(4), 2), 1).num_classes == 1


def test_quotient_examples():
    X = D1(symmetric(3))
    P0, labels0 = quotient_structure(X, 0, 2)
    assert P0.size == 1 and all(l == 0 for l in labels0) and P0.count(2) == 1
    P1, labels1 = quotient_structure(X, 1, 3)
    assert labels1 == list(range(6))
    assert all(np.array_equal(P1.cube_codes(n), X.cube_codes(n)) for n in range(4))
    rep = check_axioms(P1, 3)
    assert rep.ok and rep.step == 1


def test_fiber_examples(hzq8):
    X = D1(cyclic(3))
    (f,) = fibers(X, 1, 3)
    assert f.members == [0, 1, 2]
    fs = fibers(hzq8, 2, 3)
    assert [f.members for f in fs] == hzq8.G.cosets(hzq8.Z)
    for f in fs:
        rep = check_axioms(f.structure, 3)
        assert rep.ok and rep.k_ergodic >= 2 and rep.step == 2
    assert len(fibers(Dk(cyclic(4), 2), 2, 3)) == 1
    with pytest.raises(ClassificationError):
        fibers(Dk(cyclic(2), 3), 2, 3)


def test_changequiv_closure(hzq8):
    rng = np.random.default_rng(3)
    C = hzq8.cube_array(2)
    mate = {x: [y for y in cls] for cls in sim_relation(hzq8, 1).classes() for x in cls}
    for idx in rng.choice(len(C), 200, replace=False):
        new = tuple(int(rng.choice(mate[int(x)])) for x in C[idx])
        assert hzq8.contains(new)


def test_sim_cube_propagation(hzq8):
    rng = np.random.default_rng(5)
    labels = sim_relation(hzq8, 1).labels
    C = hzq8.cube_array(3)
    lab = np.asarray(labels)[C]
    low = [0, 1, 2, 4]
    key = [tuple(r) for r in lab[:, low].tolist()]
    groups = {}
    for i, k in enumerate(key):
        groups.setdefault(k, []).append(i)
    for k in rng.choice(len(groups), 50, replace=False):
        members = list(groups.values())[k]
        first = lab[members[0]]
        assert all(np.array_equal(lab[m], first) for m in members)


# recovery


def test_recover_group_examples():
    G = recover_group(D1(symmetric(3)))
    assert G.identity == 0 and is_isomorphic(G, symmetric(3))
    assert recover_group(D1(cyclic(2))) == cyclic(2)
    with pytest.raises(ClassificationError):
        recover_group(Dk(cyclic(2), 2))


def test_recover_abelian_examples():
    A = recover_abelian(Dk(cyclic(4), 2), 2)
    assert is_isomorphic(A, cyclic(4)) and A.identity == 0
    B = recover_abelian(Dk(cyclic(4), 2), 2, base_point=3)
    assert B.identity == 3
    V4 = direct_product(cyclic(2), cyclic(2))
    R = recover_abelian(Dk(V4, 2), 2)
    assert all(R.element_order(x) <= 2 for x in range(4))
    with pytest.raises(ClassificationError):
        recover_abelian(D1(cyclic(4)), 2)
    with pytest.raises(ValueError):
        recover_abelian(Dk(cyclic(4), 1), 1)


def test_recovery_independent_of_i():
    X = Dk(cyclic(3), 2)
    tables = [abelian_structure(X, 2, 0, i).table for i in (1, 2, 3)]
    assert tables[0] == tables[1] == tables[2]


def test_abelian_recovery_details():
    X = Dk(cyclic(2), 2)
    rec = abelian_structure(X, 2)
    op1, op2 = np.asarray(rec.ops[1]), np.asarray(rec.ops[2])
    assert np.array_equal(op1, op2)
    Y = range(len(op1))
    for j, l in ((op1, op2), (op2, op1)):
        for A, B, C, D in itertools.product(Y, repeat=4):
            assert l[j[A, B], j[C, D]] == j[l[A, C], l[B, D]]
    # reflection-symmetric cubes sit in the class of the constant cube
    C = X.cube_array(2).tolist()
    for idx, c in enumerate(C):
        for j in (1, 2):
            if list(pull(c, reflection(2, j))) == c:
                assert rec.classes.labels[idx] == rec.identity_class


def test_interchange_on_z3():
    rec = abelian_structure(Dk(cyclic(3), 2), 2)
    op1, op2 = np.asarray(rec.ops[1]), np.asarray(rec.ops[2])
    for A, B, C, D in itertools.product(range(3), repeat=4):
        assert op2[op1[A, B], op1[C, D]] == op1[op2[A, C], op2[B, D]]


def test_fiber_classification(hzq8):
    for f in fibers(hzq8, 2, 3):
        A = recover_abelian(f.structure, 2)
        assert A.order == 2
        assert np.array_equal(Dk(A, 2).cube_codes(3), f.structure.cube_codes(3))


# tower and action


def test_tower_examples(hzq8):
    t = structure_tower(D1(symmetric(3)), 2)
    assert is_isomorphic(t.levels[0].group, symmetric(3)) and t.levels[1].group.order == 1 and t.ok
    t = structure_tower(Dk(cyclic(4), 2), 2)
    assert t.levels[0].group.order == 1 and is_isomorphic(t.levels[1].group, cyclic(4)) and t.ok
    t = structure_tower(hzq8, 2)
    Q, _ = hzq8.G.quotient(hzq8.Z)
    assert is_isomorphic(t.levels[0].group, Q)
    assert t.levels[1].abelian and t.levels[1].group.order == 2
    assert t.levels[1].fibers_isomorphic and t.levels[1].transport_ok and t.projections_compatible
    json.dumps(t.to_json())


def test_fiber_action_on_z4():
    X = Dk(cyclic(4), 2)
    A = recover_abelian(X, 2)
    for a, x in itertools.product(range(4), repeat=2):
        assert fiber_action(X, 2, a, x) == A.mul(x, a)
    for a, b, x in itertools.product(range(4), repeat=3):
        assert fiber_action(X, 2, b, fiber_action(X, 2, a, x)) == fiber_action(X, 2, A.mul(a, b), x)
    assert all(fiber_action(X, 2, 0, x) == x for x in range(4))


def test_fiber_action_q8(hzq8):
    rep = verify_fiber_action(hzq8, 2)
    assert rep["ok"] and len(rep["fibers"]) == 4
    with pytest.raises(ValueError):
        fiber_action(hzq8, 2, 2, 0)


def test_action_table_is_regular():
    X = Dk(cyclic(3), 2)
    rec = abelian_structure(X, 2)
    T = action_by_class(X, 2, rec.classes.labels)
    assert all(sorted(T[:, x].tolist()) == [0, 1, 2] for x in range(3))
