"""The three model cube structures and corner completion."""

from cubelab.groups import cyclic, quaternion8, symmetric
from cubelab.structures import D1, Dk, HZk

X = D1(symmetric(3))
print("D1(S3) cube counts n=0..3:", [X.count(n) for n in range(4)])
print("completing the corner (0, 1, 2):", X.complete_corner([0, 1, 2]))

Y = Dk(cyclic(2), 2)
print("D2(Z2) cube counts n=0..4:", [Y.count(n) for n in range(5)])
print("completions of a 3-corner:", Y.completions((0, 1, 1, 0, 1, 0, 0)))

G = quaternion8()
H = HZk(G, G.center(), 2)
print("H_{Z,2}(Q8) cube counts n=0..3:", [H.count(n) for n in range(4)])
