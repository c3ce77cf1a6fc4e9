"""Discrete cube combinatorics.

Vertices of ``{0,1}^n`` are bitmasks: coordinate ``i`` (1-based) is bit ``i-1``,
so coordinate 1 is the least significant bit. String forms list coordinate 1
first, e.g. ``Vertex(3, 0b101)`` prints as ``"101"`` and ``Vertex(2, 0b01)`` as
``"10"``.

A cube morphism ``{0,1}^n -> {0,1}^m`` is given by one rule per output
coordinate: a constant, a source coordinate, or a negated source coordinate.
Every such morphism lies in the category N; the subcategory G additionally
requires the source index to be non-decreasing along the output coordinates
that are not constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Literal

MAX_DIM = 20

Category = Literal["N", "G"]


class NotAMorphism(ValueError):
    """A vertex map that is not coordinate-wise."""


def _check_dim(n: int) -> None:
    if not 0 <= n <= MAX_DIM:
        raise ValueError(f"cube dimension {n} outside [0, {MAX_DIM}]")


def bit(v: int, i: int) -> int:
    """Coordinate ``i`` (1-based) of the vertex mask ``v``."""
    return (v >> (i - 1)) & 1


def height(v: int) -> int:
    return bin(v).count("1")


def unit(i: int) -> int:
    """The vertex with a single 1 at coordinate ``i``."""
    return 1 << (i - 1)


def top(n: int) -> int:
    return (1 << n) - 1


def submasks(v: int) -> Iterator[int]:
    """All masks ``u`` with ``supp(u) ⊆ supp(v)``, in decreasing order."""
    u = v
    while True:
        yield u
        if u == 0:
            return
        u = (u - 1) & v


def vertices_by_height(n: int) -> list[int]:
    return sorted(range(1 << n), key=lambda v: (height(v), v))


@dataclass(frozen=True)
class Vertex:
    n: int
    bits: int

    def __post_init__(self):
        _check_dim(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits {self.bits} out of range for dimension {self.n}")

    @classmethod
    def of(cls, coords: Iterable[int]) -> "Vertex":
        coords = list(coords)
        bits = 0
        for i, c in enumerate(coords):
            if c not in (0, 1):
                raise ValueError(f"coordinate {c} is not 0/1")
            bits |= c << i
        return cls(len(coords), bits)

    @classmethod
    def parse(cls, s: str) -> "Vertex":
        return cls.of(int(ch) for ch in s)

    def coord(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate {i} outside [1, {self.n}]")
        return bit(self.bits, i)

    @property
    def height(self) -> int:
        return height(self.bits)

    def coords(self) -> tuple[int, ...]:
        return tuple(bit(self.bits, i) for i in range(1, self.n + 1))

    def __str__(self) -> str:
        return "".join(str(c) for c in self.coords())


@dataclass(frozen=True)
class Rule:
    """One output coordinate of a cube morphism.

    ``kind`` is ``"const"`` (``arg`` is the constant), ``"coord"`` or ``"neg"``
    (``arg`` is the 1-based source coordinate).
    """

    kind: str
    arg: int

    @classmethod
    def const(cls, c: int) -> "Rule":
        if c not in (0, 1):
            raise ValueError(f"constant rule must be 0 or 1, got {c}")
        return cls("const", c)

    @classmethod
    def coord(cls, j: int) -> "Rule":
        return cls("coord", j)

    @classmethod
    def neg(cls, j: int) -> "Rule":
        return cls("neg", j)

    @property
    def source(self) -> int:
        """The dependence index: 0 for constants, else the source coordinate."""
        return 0 if self.kind == "const" else self.arg

    def evaluate(self, v: int) -> int:
        if self.kind == "const":
            return self.arg
        b = bit(v, self.arg)
        return b if self.kind == "coord" else 1 - b

    def negated(self) -> "Rule":
        if self.kind == "const":
            return Rule.const(1 - self.arg)
        return Rule("neg" if self.kind == "coord" else "coord", self.arg)

    def to_json(self) -> dict:
        return {"const": {"c": self.arg}, "coord": {"x": self.arg}, "neg": {"nx": self.arg}}[self.kind]

    @classmethod
    def from_json(cls, obj: dict) -> "Rule":
        if "c" in obj:
            return cls.const(int(obj["c"]))
        if "x" in obj:
            return cls.coord(int(obj["x"]))
        if "nx" in obj:
            return cls.neg(int(obj["nx"]))
        raise ValueError(f"unrecognised rule {obj!r}")


@dataclass(frozen=True)
class VertexMap:
    """An arbitrary map ``{0,1}^n -> {0,1}^m`` given by its vertex table."""

    n: int
    m: int
    table: tuple[int, ...]

    def __post_init__(self):
        _check_dim(self.n)
        _check_dim(self.m)
        if len(self.table) != 1 << self.n:
            raise ValueError(f"table has {len(self.table)} entries, expected {1 << self.n}")
        if any(not 0 <= t < (1 << self.m) for t in self.table):
            raise ValueError("table value outside target cube")

    def __call__(self, v: int) -> int:
        return self.table[v]


@dataclass(frozen=True)
class CubeMorphism:
    n: int
    m: int
    rules: tuple[Rule, ...]

    def __post_init__(self):
        _check_dim(self.n)
        _check_dim(self.m)
        object.__setattr__(self, "rules", tuple(self.rules))
        if len(self.rules) != self.m:
            raise ValueError(f"{len(self.rules)} rules for target dimension {self.m}")
        for r in self.rules:
            if r.kind not in ("const", "coord", "neg"):
                raise ValueError(f"bad rule kind {r.kind!r}")
            if r.kind != "const" and not 1 <= r.arg <= self.n:
                raise ValueError(f"rule refers to coordinate {r.arg} of a {self.n}-cube")

    @cached_property
    def table(self) -> tuple[int, ...]:
        out = []
        for v in range(1 << self.n):
            w = 0
            for i, r in enumerate(self.rules):
                w |= r.evaluate(v) << i
            out.append(w)
        return tuple(out)

    @property
    def gamma(self) -> tuple[int, ...]:
        return tuple(r.source for r in self.rules)

    def __call__(self, v: int) -> int:
        return self.table[v]

    def as_vertex_map(self) -> VertexMap:
        return VertexMap(self.n, self.m, self.table)

    @classmethod
    def from_table(cls, n: int, m: int, table) -> "CubeMorphism":
        """Rule decomposition of a raw vertex map; raises NotAMorphism if none exists."""
        vm = table if isinstance(table, VertexMap) else VertexMap(n, m, tuple(table))
        rules = []
        for i in range(1, m + 1):
            col = [bit(t, i) for t in vm.table]
            if all(c == col[0] for c in col):
                rules.append(Rule.const(col[0]))
                continue
            for j in range(1, n + 1):
                src = [bit(v, j) for v in range(1 << n)]
                if col == src:
                    rules.append(Rule.coord(j))
                    break
                if all(c != s for c, s in zip(col, src)):
                    rules.append(Rule.neg(j))
                    break
            else:
                raise NotAMorphism(f"output coordinate {i} depends on more than one input coordinate")
        return cls(n, m, tuple(rules))

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "rules": [r.to_json() for r in self.rules]}

    @classmethod
    def from_json(cls, obj: dict) -> "CubeMorphism":
        return cls(int(obj["n"]), int(obj["m"]), tuple(Rule.from_json(r) for r in obj["rules"]))

    def __str__(self) -> str:
        names = []
        for r in self.rules:
            if r.kind == "const":
                names.append(str(r.arg))
            elif r.kind == "coord":
                names.append(f"x{r.arg}")
            else:
                names.append(f"1-x{r.arg}")
        return f"({', '.join(names)})"


def apply(phi: CubeMorphism, v: Vertex) -> Vertex:
    if v.n != phi.n:
        raise ValueError(f"vertex of dimension {v.n} given to a morphism from dimension {phi.n}")
    return Vertex(phi.m, phi(v.bits))


def _monotone_on_support(gamma: tuple[int, ...]) -> bool:
    nonzero = [g for g in gamma if g]
    return all(a <= b for a, b in zip(nonzero, nonzero[1:]))


def in_category(phi: CubeMorphism | VertexMap, cat: Category) -> bool:
    if cat not in ("N", "G"):
        raise ValueError(f"unknown category {cat!r}")
    if isinstance(phi, VertexMap):
        try:
            phi = CubeMorphism.from_table(phi.n, phi.m, phi)
        except NotAMorphism:
            return False
    if cat == "N":
        return True
    return _monotone_on_support(phi.gamma)


def compose(phi2: CubeMorphism, phi1: CubeMorphism) -> CubeMorphism:
    """``phi2 ∘ phi1``."""
    if phi1.m != phi2.n:
        raise ValueError(f"cannot compose: {phi1.m} != {phi2.n}")
    rules = []
    for r in phi2.rules:
        if r.kind == "const":
            rules.append(r)
        elif r.kind == "coord":
            rules.append(phi1.rules[r.arg - 1])
        else:
            rules.append(phi1.rules[r.arg - 1].negated())
    return CubeMorphism(phi1.n, phi2.m, tuple(rules))


def hom(n: int, m: int, cat: Category = "G") -> Iterator[CubeMorphism]:
    """Every morphism ``{0,1}^n -> {0,1}^m`` of the category."""
    options = [Rule.const(0), Rule.const(1)]
    for j in range(1, n + 1):
        options += [Rule.coord(j), Rule.neg(j)]
    for rules in itertools.product(options, repeat=m):
        if cat == "G" and not _monotone_on_support(tuple(r.source for r in rules)):
            continue
        yield CubeMorphism(n, m, rules)


# standard morphisms


def identity(n: int) -> CubeMorphism:
    return CubeMorphism(n, n, tuple(Rule.coord(j) for j in range(1, n + 1)))


def face(n: int, i: int, j: int) -> CubeMorphism:
    """Face embedding ``e^n_{i,j}: {0,1}^{n-1} -> {0,1}^n`` inserting ``j`` at coordinate ``i``."""
    if n < 1 or not 1 <= i <= n or j not in (0, 1):
        raise ValueError(f"bad face embedding parameters n={n}, i={i}, j={j}")
    rules = [Rule.coord(t) for t in range(1, i)] + [Rule.const(j)]
    rules += [Rule.coord(t) for t in range(i, n)]
    return CubeMorphism(n - 1, n, tuple(rules))


def simplicial(v: Vertex) -> CubeMorphism:
    """``s_v: {0,1}^{h(v)} -> {0,1}^n`` onto the sub-cube spanned by ``supp(v)``."""
    rules = []
    rank = 0
    for t in range(1, v.n + 1):
        if bit(v.bits, t):
            rank += 1
            rules.append(Rule.coord(rank))
        else:
            rules.append(Rule.const(0))
    return CubeMorphism(v.height, v.n, tuple(rules))


def projection(n: int, coords: Iterable[int]) -> CubeMorphism:
    """``p_T: {0,1}^n -> {0,1}^{|T|}`` keeping the coordinates in ``T`` in order."""
    T = sorted(set(coords))
    if any(not 1 <= a <= n for a in T):
        raise ValueError(f"projection coordinates {T} outside [1, {n}]")
    return CubeMorphism(n, len(T), tuple(Rule.coord(a) for a in T))


def reflection(n: int, i: int) -> CubeMorphism:
    if not 1 <= i <= n:
        raise ValueError(f"reflection index {i} outside [1, {n}]")
    return CubeMorphism(n, n, tuple(Rule.neg(t) if t == i else Rule.coord(t) for t in range(1, n + 1)))


def transposition(n: int, i: int, j: int) -> CubeMorphism:
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise ValueError(f"bad transposition ({i}, {j}) on dimension {n}")
    swap = {i: j, j: i}
    return CubeMorphism(n, n, tuple(Rule.coord(swap.get(t, t)) for t in range(1, n + 1)))


def alpha(n: int) -> CubeMorphism:
    """``(x_1..x_n) -> (1-x_1, x_1, ..., 1-x_n, x_n)``."""
    rules = []
    for i in range(1, n + 1):
        rules += [Rule.neg(i), Rule.coord(i)]
    return CubeMorphism(n, 2 * n, tuple(rules))


def extend_by_constant(n: int, k: int, c: int) -> CubeMorphism:
    """``(x_1..x_n) -> (x_1..x_n, c, ..., c)`` into dimension ``k >= n``."""
    if k < n:
        raise ValueError(f"target dimension {k} below source {n}")
    rules = [Rule.coord(t) for t in range(1, n + 1)] + [Rule.const(c)] * (k - n)
    return CubeMorphism(n, k, tuple(rules))


def standard(kind: str, **params) -> CubeMorphism:
    """Constructor dispatch: ``e``, ``s``, ``p``, ``r``, ``t``, ``alpha``, ``id``."""
    makers = {
        "e": lambda n, i, j: face(n, i, j),
        "s": lambda v: simplicial(v),
        "p": lambda n, T: projection(n, T),
        "r": lambda n, i: reflection(n, i),
        "t": lambda n, i, j: transposition(n, i, j),
        "alpha": lambda n: alpha(n),
        "id": lambda n: identity(n),
    }
    if kind not in makers:
        raise ValueError(f"unknown standard morphism {kind!r}")
    return makers[kind](**params)


# three-cube construction


def in_T(n: int, v: int) -> bool:
    return all(not (bit(v, 2 * i - 1) and bit(v, 2 * i)) for i in range(1, n + 1))


def fold_flat(n: int, v: Vertex, which: Literal["fold", "flat"]) -> Vertex:
    if v.n != 2 * n or not in_T(n, v.bits):
        raise ValueError(f"{v} is not in T_{n}")
    out = 0
    for i in range(1, n + 1):
        if which == "fold":
            c = bit(v.bits, 2 * i - 1) + bit(v.bits, 2 * i)
        elif which == "flat":
            c = bit(v.bits, 2 * i)
        else:
            raise ValueError(f"which must be 'fold' or 'flat', got {which!r}")
        out |= c << (i - 1)
    return Vertex(n, out)


# reflection group


def reflection_group(n: int) -> list[CubeMorphism]:
    """All elements of R_n, indexed by the mask of reflected coordinates."""
    return [
        CubeMorphism(n, n, tuple(Rule.neg(t) if bit(mask, t) else Rule.coord(t) for t in range(1, n + 1)))
        for mask in range(1 << n)
    ]


def reflection_group_orbit(n: int, v: Vertex) -> set[Vertex]:
    if v.n != n:
        raise ValueError("dimension mismatch")
    return {apply(g, v) for g in reflection_group(n)}


def reflector(n: int, w: Vertex) -> CubeMorphism:
    """The unique element ``γ`` of R_n with ``γ(w) = 1^n``; it is an involution."""
    if w.n != n:
        raise ValueError("dimension mismatch")
    flip = top(n) ^ w.bits
    return reflection_group(n)[flip]


@dataclass(frozen=True)
class SimplicialSet:
    n: int
    members: frozenset[int]

    def __post_init__(self):
        _check_dim(self.n)
        object.__setattr__(self, "members", frozenset(self.members))
        for v in self.members:
            if not 0 <= v < (1 << self.n):
                raise ValueError(f"vertex {v} outside {{0,1}}^{self.n}")
            for u in submasks(v):
                if u not in self.members:
                    raise ValueError(f"not downward closed: {Vertex(self.n, v)} in set but {Vertex(self.n, u)} missing")

    def maximal(self) -> list[int]:
        return sorted(
            v for v in self.members if not any(w != v and (w & v) == v for w in self.members)
        )

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)


def T_set(n: int) -> SimplicialSet:
    return SimplicialSet(2 * n, frozenset(v for v in range(1 << (2 * n)) if in_T(n, v)))


def low_hull(n: int, k: int) -> list[int]:
    """``{0,1}^n_k``: vertices of height at most ``k``, by height."""
    return [v for v in vertices_by_height(n) if height(v) <= k]
