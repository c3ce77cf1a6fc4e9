"""Finite groups as multiplication tables, free-group words, affine morphisms."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .cubes import VertexMap, bit, unit

VALIDATION_LIMIT = 64
AFFINE_TEST_DIM = 6


class GroupLawError(ValueError):
    """A table that is not a group; ``triple`` names the failing elements if any."""

    def __init__(self, message: str, triple: tuple[int, ...] | None = None):
        super().__init__(message)
        self.triple = triple


class GroupTable:
    """A finite group on element indices ``0..order-1``.

    ``mult[i, j]`` is the index of the product ``i * j``. The identity need not
    be index 0; it is located from the table. Tables larger than
    ``VALIDATION_LIMIT`` are only checked for associativity when
    ``validate=True`` is passed explicitly; ``validate=False`` skips it
    entirely and is unsafe for untrusted input.
    """

    def __init__(self, mult, names: Sequence[str] | None = None, validate: bool | None = None):
        mult = np.array(mult, dtype=np.int64)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1] or mult.shape[0] == 0:
            raise GroupLawError(f"table must be a non-empty square array, got shape {mult.shape}")
        n = mult.shape[0]
        if mult.min() < 0 or mult.max() >= n:
            bad = np.argwhere((mult < 0) | (mult >= n))[0]
            raise GroupLawError("closure fails: product outside the element range", (int(bad[0]), int(bad[1])))
        mult.setflags(write=False)
        self.mult = mult
        self.order = n
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        if len(self.names) != n:
            raise GroupLawError(f"{len(self.names)} names for {n} elements")

        if validate is None:
            validate = n <= VALIDATION_LIMIT
        if validate:
            self._check_associative()
        ar = np.arange(n)
        ids = [e for e in range(n) if (mult[e] == ar).all() and (mult[:, e] == ar).all()]
        if not ids:
            raise GroupLawError("no identity element")
        self.identity = ids[0]
        inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            right = np.nonzero(mult[a] == self.identity)[0]
            if len(right) != 1 or mult[right[0], a] != self.identity:
                raise GroupLawError(f"element {a} has no two-sided inverse", (a,))
            inv[a] = right[0]
        inv.setflags(write=False)
        self.inv = inv
        self._rows = mult.tolist()
        self._inv = inv.tolist()

    def _check_associative(self) -> None:
        m = self.mult
        left = m[m]  # left[a, b, c] = (a*b)*c
        right = m[:, m]  # right[a, b, c] = a*(b*c)
        bad = np.argwhere(left != right)
        if len(bad):
            a, b, c = (int(x) for x in bad[0])
            raise GroupLawError(f"associativity fails for ({a}, {b}, {c})", (a, b, c))

    # arithmetic

    def mul(self, a: int, b: int) -> int:
        return self._rows[a][b]

    def inverse(self, a: int) -> int:
        return self._inv[a]

    def product(self, elems) -> int:
        acc = self.identity
        for x in elems:
            acc = self._rows[acc][x]
        return acc

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self._inv[a], -k
        acc = self.identity
        for _ in range(k):
            acc = self._rows[acc][a]
        return acc

    def conj(self, g: int, h: int) -> int:
        """``g^h = h^{-1} g h``."""
        return self._rows[self._rows[self._inv[h]][g]][h]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self._rows[x][a]
            k += 1
        return k

    def __len__(self) -> int:
        return self.order

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupTable) and np.array_equal(self.mult, other.mult)

    def __hash__(self) -> int:
        return hash(self.mult.tobytes())

    def __repr__(self) -> str:
        return f"GroupTable(order={self.order})"

    # structure

    def is_abelian(self) -> bool:
        return bool((self.mult == self.mult.T).all())

    def center(self) -> list[int]:
        return [z for z in range(self.order) if (self.mult[z] == self.mult[:, z]).all()]

    def is_subgroup(self, subset) -> bool:
        s = set(subset)
        if self.identity not in s:
            return False
        return all(self._rows[a][self._inv[b]] in s for a in s for b in s)

    def is_normal(self, subset) -> bool:
        s = set(subset)
        if not self.is_subgroup(s):
            raise ValueError("subset is not a subgroup")
        return all(self.conj(x, g) in s for x in s for g in range(self.order))

    def subgroup(self, subset) -> tuple["GroupTable", list[int]]:
        """The subgroup as its own table, with the list mapping new indices to old."""
        members = sorted(set(subset))
        if not self.is_subgroup(members):
            raise ValueError("subset is not a subgroup")
        pos = {x: i for i, x in enumerate(members)}
        table = [[pos[self._rows[a][b]] for b in members] for a in members]
        return GroupTable(table, names=[self.names[x] for x in members]), members

    def cosets(self, subset) -> list[list[int]]:
        s = sorted(set(subset))
        seen = [False] * self.order
        out = []
        for g in range(self.order):
            if not seen[g]:
                coset = sorted(self._rows[g][x] for x in s)
                for y in coset:
                    seen[y] = True
                out.append(coset)
        return out

    def quotient(self, subset) -> tuple["GroupTable", list[int]]:
        """``G/N`` with cosets ordered by least member, plus the projection map."""
        if not self.is_normal(subset):
            raise ValueError("quotient by a non-normal subgroup")
        classes = self.cosets(subset)
        proj = [0] * self.order
        for idx, cls in enumerate(classes):
            for x in cls:
                proj[x] = idx
        reps = [c[0] for c in classes]
        table = [[proj[self._rows[a][b]] for b in reps] for a in reps]
        names = ["{" + ",".join(self.names[x] for x in c) + "}" for c in classes]
        return GroupTable(table, names=names), proj

    # serialization

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.mult.tolist(), "names": self.names}

    @classmethod
    def from_json(cls, obj: dict, validate: bool | None = None) -> "GroupTable":
        table = obj["table"]
        if "order" in obj and int(obj["order"]) != len(table):
            raise GroupLawError(f"declared order {obj['order']} but table has {len(table)} rows")
        return cls(table, names=obj.get("names"), validate=validate)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path, validate: bool | None = None) -> "GroupTable":
        return cls.from_json(json.loads(Path(path).read_text()), validate=validate)


def quotient_map_json(proj: Sequence[int]) -> dict:
    classes: dict[int, list[int]] = {}
    for x, c in enumerate(proj):
        classes.setdefault(c, []).append(x)
    return {"classes": [classes[c] for c in sorted(classes)]}


# constructors


def cyclic(n: int) -> GroupTable:
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    return GroupTable([[(a + b) % n for b in range(n)] for a in range(n)], names=[str(a) for a in range(n)])


def dihedral(n: int) -> GroupTable:
    """Symmetries of the regular n-gon, order 2n; element ``r^a s^b`` has index ``a + n*b``."""
    if n < 1:
        raise ValueError("dihedral parameter must be positive")

    def mul(x, y):
        a, b = x % n, x // n
        c, d = y % n, y // n
        return ((a + (c if b == 0 else -c)) % n) + n * ((b + d) % 2)

    names = [f"r{a}" + ("s" if b else "") for b in range(2) for a in range(n)]
    return GroupTable([[mul(x, y) for y in range(2 * n)] for x in range(2 * n)], names=names)


def from_permutations(perms: Sequence[Sequence[int]]) -> GroupTable:
    """Group of the given permutations (assumed closed); ``(p*q)(x) = p(q(x))``."""
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[x] for x in q)] for q in perms] for p in perms]
    return GroupTable(table, names=["".join(map(str, p)) for p in perms])


def symmetric(n: int) -> GroupTable:
    return from_permutations(list(itertools.permutations(range(n))))


def _parity(p) -> int:
    inversions = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return inversions % 2


def alternating(n: int) -> GroupTable:
    return from_permutations([p for p in itertools.permutations(range(n)) if _parity(p) == 0])


def quaternion8() -> GroupTable:
    """Q8 with elements ordered ``1, -1, i, -i, j, -j, k, -k``."""
    units = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }
    elems = [(s, u) for u in "1ijk" for s in (1, -1)]
    index = {e: i for i, e in enumerate(elems)}
    table = []
    for s1, u1 in elems:
        row = []
        for s2, u2 in elems:
            s, u = units[(u1, u2)]
            row.append(index[(s1 * s2 * s, u)])
        table.append(row)
    names = [("" if s > 0 else "-") + u for s, u in elems]
    return GroupTable(table, names=names)


def direct_product(G: GroupTable, H: GroupTable) -> GroupTable:
    """``G x H`` with ``(g, h)`` at index ``g * |H| + h``."""
    m = H.order
    table = [
        [G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(G.order * m)]
        for a in range(G.order * m)
    ]
    names = [f"({g},{h})" for g in G.names for h in H.names]
    return GroupTable(table, names=names)


def from_file(path, validate: bool | None = None) -> GroupTable:
    return GroupTable.load(path, validate=validate)


def make_group(kind: str, n: int | None = None, path=None) -> GroupTable:
    """Constructor dispatch used by the command line."""
    if kind == "cyclic":
        return cyclic(n)
    if kind == "dihedral":
        return dihedral(n)
    if kind == "symmetric":
        return symmetric(n)
    if kind == "alternating":
        return alternating(n)
    if kind in ("quaternion8", "quaternion"):
        return quaternion8()
    if kind == "file":
        return from_file(path)
    raise ValueError(f"unknown group kind {kind!r}")


# isomorphism


def invariant_profile(G: GroupTable) -> tuple:
    orders = sorted(G.element_order(a) for a in range(G.order))
    return (G.order, tuple(orders), len(G.center()), G.is_abelian())


def _generators(G: GroupTable) -> list[int]:
    by_order = sorted(range(G.order), key=lambda a: -G.element_order(a))
    gens: list[int] = []
    span = {G.identity}
    for a in by_order:
        if a in span:
            continue
        gens.append(a)
        span = _closure(G, gens)
        if len(span) == G.order:
            break
    return gens


def _closure(G: GroupTable, gens) -> set[int]:
    span = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return span


def find_isomorphism(G: GroupTable, H: GroupTable) -> list[int] | None:
    """An isomorphism ``G -> H`` as an index list, or ``None``.

    Exhaustive over images of a generating set of ``G`` (respecting element
    orders), with every candidate verified as a bijective homomorphism.
    """
    if invariant_profile(G) != invariant_profile(H):
        return None
    gens = _generators(G)
    candidates = [[h for h in range(H.order) if H.element_order(h) == G.element_order(g)] for g in gens]
    for images in itertools.product(*candidates):
        phi = [-1] * G.order
        phi[G.identity] = H.identity
        queue = [G.identity]
        ok = True
        while queue and ok:
            x = queue.pop()
            for g, img in zip(gens, images):
                y = G.mul(x, g)
                val = H.mul(phi[x], img)
                if phi[y] == -1:
                    phi[y] = val
                    queue.append(y)
                elif phi[y] != val:
                    ok = False
                    break
        if not ok or -1 in phi or len(set(phi)) != G.order:
            continue
        if all(phi[G.mul(a, b)] == H.mul(phi[a], phi[b]) for a in range(G.order) for b in range(G.order)):
            return phi
    return None


def is_isomorphic(G: GroupTable, H: GroupTable) -> bool:
    return find_isomorphism(G, H) is not None


# free groups


def reduce_letters(letters) -> tuple[tuple[int, int], ...]:
    stack: list[tuple[int, int]] = []
    for g, e in letters:
        if stack and stack[-1][0] == g and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((g, e))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """Element of the free group ``F_k``; letters are ``(generator, ±1)``, kept reduced."""

    k: int
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        letters = tuple((int(g), int(e)) for g, e in self.letters)
        for g, e in letters:
            if not 1 <= g <= self.k or e not in (1, -1):
                raise ValueError(f"bad letter ({g}, {e}) for F_{self.k}")
        object.__setattr__(self, "letters", reduce_letters(letters))

    @classmethod
    def gen(cls, k: int, i: int) -> "Word":
        return cls(k, ((i, 1),))

    @classmethod
    def identity(cls, k: int) -> "Word":
        return cls(k, ())

    def __mul__(self, other: "Word") -> "Word":
        if self.k != other.k:
            raise ValueError("words from different free groups")
        return Word(self.k, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(self.k, tuple((g, -e) for g, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out = Word.identity(self.k)
        for _ in range(abs(n)):
            out = out * base
        return out

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"g{g}" if e == 1 else f"g{g}^-1" for g, e in self.letters)


def reduce(w: Word) -> Word:
    return Word(w.k, reduce_letters(w.letters))


class FreeGroup:
    """``F_k`` exposing the same arithmetic surface as ``GroupTable``."""

    def __init__(self, k: int):
        self.k = k
        self.identity = Word.identity(k)

    def mul(self, a: Word, b: Word) -> Word:
        return a * b

    def inverse(self, a: Word) -> Word:
        return a.inverse()

    def gen(self, i: int) -> Word:
        return Word.gen(self.k, i)

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeGroup) and other.k == self.k

    def __hash__(self) -> int:
        return hash(("F", self.k))

    def __repr__(self) -> str:
        return f"FreeGroup({self.k})"


def tau(k: int, v: int) -> Word:
    """The fundamental cube ``v -> g_1^{v_1} ... g_k^{v_k}`` in ``F_k``."""
    return Word(k, tuple((i, 1) for i in range(1, k + 1) if bit(v, i)))


Target = Union[GroupTable, FreeGroup]


@dataclass(frozen=True)
class AffineMap:
    """``f(w) = base * m(w)`` for the homomorphism ``m: F_k -> target`` fixed by ``gen_images``."""

    target: Target
    k: int
    base: object
    gen_images: tuple

    def hom(self, w: Word) -> object:
        T = self.target
        acc = T.identity
        for g, e in w.letters:
            img = self.gen_images[g - 1]
            acc = T.mul(acc, img if e == 1 else T.inverse(img))
        return acc

    def __call__(self, w: Word) -> object:
        if w.k != self.k:
            raise ValueError(f"word from F_{w.k} given to a map on F_{self.k}")
        return self.target.mul(self.base, self.hom(w))

    def on_star(self) -> list:
        """Values on ``{1, g_1, ..., g_k}``."""
        return [self(Word.identity(self.k))] + [self(Word.gen(self.k, i)) for i in range(1, self.k + 1)]


def affine_from_star(values: Sequence, target: Target) -> AffineMap:
    """The unique affine map ``F_k -> target`` with the given values on ``1, g_1, ..., g_k``."""
    if len(values) < 1:
        raise ValueError("need at least the value at the identity")
    base = values[0]
    binv = target.inverse(base)
    images = tuple(target.mul(binv, v) for v in values[1:])
    return AffineMap(target, len(values) - 1, base, images)


def _is_affine_quadruple(f: np.ndarray, G1: GroupTable, G2: GroupTable) -> bool:
    m1, i1 = G1.mult, G1.inv
    # d = a b^{-1} c for every (a, b, c)
    ab = m1[:, i1]  # ab[a, b] = a * b^{-1}
    d = m1[ab]  # d[a, b, c]
    m2, i2 = G2.mult, G2.inv
    fa = f[:, None, None]
    fb_inv = i2[f][None, :, None]
    fc = f[None, None, :]
    fd_inv = i2[f[d]]
    lhs = m2[m2[m2[fa, fb_inv], fc], fd_inv]
    return bool((lhs == G2.identity).all())


def _is_affine_hom(f: np.ndarray, G1: GroupTable, G2: GroupTable) -> bool:
    m = G2.mult[G2.inv[f[G1.identity]], f]  # x -> f(1)^{-1} f(x)
    return bool((m[G1.mult] == G2.mult[m[:, None], m[None, :]]).all())


def is_affine(f: Sequence[int], G1: GroupTable, G2: GroupTable) -> bool:
    """Whether ``f: G1 -> G2`` (as an index list) is an affine morphism.

    Runs the quadruple criterion and the homomorphism criterion; they must agree.
    """
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (G1.order,):
        raise ValueError(f"map must list {G1.order} values")
    quad = _is_affine_quadruple(f, G1, G2)
    homo = _is_affine_hom(f, G1, G2)
    if quad != homo:
        raise RuntimeError("affine criteria disagree; group tables are inconsistent")
    return quad


def lift_affine(f: AffineMap, G: GroupTable, N) -> AffineMap:
    """A lift ``f'`` into ``G`` with ``h ∘ f' = f`` for the factor map ``h: G -> G/N``."""
    Q, proj = G.quotient(N)
    if f.target != Q:
        raise ValueError("affine map does not target the quotient G/N")
    preimage = {}
    for x in range(G.order):
        preimage.setdefault(proj[x], x)
    return affine_from_star([preimage[v] for v in f.on_star()], G)


def project(f: AffineMap, proj: Sequence[int], Q: GroupTable) -> AffineMap:
    """``h ∘ f`` for a factor map ``h`` given as an index list."""
    return AffineMap(Q, f.k, proj[f.base], tuple(proj[x] for x in f.gen_images))


def g_morphism_free_test(phi: VertexMap) -> bool:
    """Whether ``tau_n(v) -> tau_m(phi(v))`` extends to an affine map ``F_n -> F_m``."""
    n, m = phi.n, phi.m
    if n > AFFINE_TEST_DIM or m > AFFINE_TEST_DIM:
        raise ValueError(f"free-group test is limited to dimensions <= {AFFINE_TEST_DIM}")
    Fm = FreeGroup(m)
    star = [tau(m, phi(0))] + [tau(m, phi(unit(i))) for i in range(1, n + 1)]
    f = affine_from_star(star, Fm)
    return all(f(tau(n, v)) == tau(m, phi(v)) for v in range(1 << n))


def z_morphism_test(phi: VertexMap) -> bool:
    """Whether ``phi`` is the restriction of an affine map ``Z^n -> Z^m``."""
    n, m = phi.n, phi.m
    if n > AFFINE_TEST_DIM or m > AFFINE_TEST_DIM:
        raise ValueError(f"integer-affine test is limited to dimensions <= {AFFINE_TEST_DIM}")

    def vec(w):
        return np.array([bit(w, i) for i in range(1, m + 1)], dtype=np.int64)

    b = vec(phi(0))
    M = np.array([vec(phi(unit(i))) - b for i in range(1, n + 1)], dtype=np.int64).reshape(n, m)
    for v in range(1 << n):
        x = np.array([bit(v, i) for i in range(1, n + 1)], dtype=np.int64)
        if not np.array_equal(x @ M + b, vec(phi(v))):
            return False
    return True
