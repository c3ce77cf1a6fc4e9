"""Cube morphisms, group tables and affine maps on free groups."""

from cubelab.cubes import hom, transposition
from cubelab.groups import affine_from_star, g_morphism_free_test, quaternion8, symmetric, z_morphism_test

t = transposition(2, 1, 2)
print("t_{1,2} on vertices:", t.as_vertex_map().table)
print("N-morphisms {0,1}^1 -> {0,1}^2:", sum(1 for _ in hom(1, 2, "N")))
print("t_{1,2} passes the integer test:", z_morphism_test(t.as_vertex_map()))
print("t_{1,2} passes the free-group test:", g_morphism_free_test(t.as_vertex_map()))

S3 = symmetric(3)
print("S3 order", S3.order, "center", S3.center())
Q8 = quaternion8()
Q, proj = Q8.quotient(Q8.center())
print("Q8 / Z(Q8) has order", Q.order, "and is abelian:", Q.is_abelian())

f = affine_from_star([1, 2, 3], Q8)
print("affine map on F_2 fixed by its star values:", f.on_star())
