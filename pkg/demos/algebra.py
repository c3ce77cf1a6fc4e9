"""Axiom checks, group recovery, the factor tower and the fiber action."""

from cubelab.algebra import check_axioms, find_nilspace_witness, recover_abelian, recover_group, structure_tower, verify_fiber_action
from cubelab.groups import cyclic, dihedral, quaternion8, symmetric
from cubelab.structures import D1, Dk, HZk

rep = check_axioms(D1(symmetric(3)), 3)
print("D1(S3): ok", rep.ok, "step", rep.step)
print("recovered group order:", recover_group(D1(symmetric(3))).order)

A = recover_abelian(Dk(cyclic(4), 2), 2)
print("abelian group recovered from D2(Z4):", A.mult.tolist())

G = quaternion8()
X = HZk(G, G.center(), 2)
tower = structure_tower(X, 2)
for level in tower.levels:
    print(f"level {level.level}: group order {level.group.order}, abelian {level.abelian}")
print("fiber action verified:", verify_fiber_action(X, 2)["ok"])

D = dihedral(6)
w = find_nilspace_witness(HZk(D, D.center(), 2), 2)
print("a cube of H_{Z,2}(D12) whose transposed pullback is not a cube:", w["cube"], "->", w["pullback"])
print("same search on Q8:", find_nilspace_witness(X, 3))
