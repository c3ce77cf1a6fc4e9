"""Cube structures on finite ground sets.

A cube of dimension n is a tuple of ``2**n`` point indices indexed by vertex
mask (see ``cubes``). A corner is the same tuple without its last entry, the
value at the top vertex ``1^n``.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from ._common import DEFAULT_ENUM_BUDGET, check_budget, cube_dim, encode_rows
from .cubes import MAX_DIM, CubeMorphism, SimplicialSet, Vertex, bit, face, height, low_hull, simplicial, top, unit, vertices_by_height
from .groups import GroupTable


class CornerError(ValueError):
    """A corner whose lower face ``e^n_{face,0}`` is not a cube."""

    def __init__(self, message: str, face: int):
        super().__init__(message)
        self.face = face


class DimensionError(ValueError):
    pass


def pull(c: Sequence[int], phi: CubeMorphism) -> tuple[int, ...]:
    """``c ∘ phi``."""
    if len(c) != 1 << phi.m:
        raise ValueError(f"cube of length {len(c)} does not match target dimension {phi.m}")
    return tuple(c[w] for w in phi.table)


def face_of(c: Sequence[int], i: int, j: int) -> tuple[int, ...]:
    """``c ∘ e^n_{i,j}``."""
    return pull(c, face(cube_dim(len(c)), i, j))


def sub_cube(c: Sequence[int], v: int) -> tuple[int, ...]:
    """``c ∘ s_v``."""
    return pull(c, simplicial(Vertex(cube_dim(len(c)), v)))


@lru_cache(maxsize=None)
def _face_index(n: int, i: int, j: int) -> np.ndarray:
    return np.array(face(n, i, j).table, dtype=np.int64)


@lru_cache(maxsize=None)
def _sub_index(n: int, v: int) -> np.ndarray:
    return np.array(simplicial(Vertex(n, v)).table, dtype=np.int64)


class CubeStructure:
    """A ground set ``0..size-1`` with a designated set of n-cubes for each n."""

    size: int
    kind: str = "abstract"

    def max_dim(self) -> int:
        return MAX_DIM

    def _check_dim(self, n: int) -> None:
        if not 0 <= n <= self.max_dim():
            raise DimensionError(f"dimension {n} above the supported maximum {self.max_dim()} for {self}")

    # membership

    def contains(self, c: Sequence[int]) -> bool:
        n = cube_dim(len(c))
        self._check_dim(n)
        if any(not 0 <= x < self.size for x in c):
            return False
        return bool(self.contains_many(np.asarray(c, dtype=np.int64)[None, :])[0])

    def contains_many(self, cubes: np.ndarray) -> np.ndarray:
        """Membership for each row of a ``(N, 2**n)`` array of values in range."""
        cubes = np.asarray(cubes, dtype=np.int64)
        n = cube_dim(cubes.shape[1])
        self._check_dim(n)
        if cubes.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        return self._contains_many(cubes, n)

    def _contains_many(self, cubes: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError

    # completion

    def check_corner(self, corner: Sequence[int]) -> int:
        """Validate a corner and return its dimension; raises CornerError on a bad lower face."""
        n = cube_dim(len(corner) + 1)
        if n == 0:
            raise ValueError("a 0-dimensional corner is empty")
        full = list(corner) + [corner[0]]
        for i in range(1, n + 1):
            if not self.contains(face_of(full, i, 0)):
                raise CornerError(f"lower face e_{{{i},0}} of the corner is not a cube", i)
        return n

    def completions(self, corner: Sequence[int]) -> list[int]:
        """All values at ``1^n`` that complete the corner to a cube."""
        self.check_corner(corner)
        cand = np.empty((self.size, len(corner) + 1), dtype=np.int64)
        cand[:, :-1] = corner
        cand[:, -1] = np.arange(self.size)
        return [int(x) for x in np.nonzero(self.contains_many(cand))[0]]

    def complete_corner(self, corner: Sequence[int]) -> list[tuple[int, ...]]:
        return [tuple(corner) + (x,) for x in self.completions(corner)]

    # enumeration

    def enumeration_cost(self, n: int) -> int:
        raise NotImplementedError

    def _enumerate_array(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def cube_array(self, n: int, budget: int | None = None) -> np.ndarray:
        """All n-cubes as a read-only array, one row each, sorted by code."""
        self._check_dim(n)
        cache = self.__dict__.setdefault("_arrays", {})
        if n not in cache:
            check_budget(f"enumerating {n}-cubes of {self}", self.enumeration_cost(n), budget, DEFAULT_ENUM_BUDGET)
            arr = np.asarray(self._enumerate_array(n), dtype=np.int64).reshape(-1, 1 << n)
            codes = encode_rows(arr, self.size)
            codes, first = np.unique(codes, return_index=True)
            arr = arr[first]
            arr.setflags(write=False)
            cache[n] = (arr, codes)
        return cache[n][0]

    def cube_codes(self, n: int, budget: int | None = None) -> np.ndarray:
        self.cube_array(n, budget)
        return self.__dict__["_arrays"][n][1]

    def enumerate(self, n: int, budget: int | None = None) -> Iterator[tuple[int, ...]]:
        for row in self.cube_array(n, budget).tolist():
            yield tuple(row)

    def count(self, n: int, budget: int | None = None) -> int:
        return len(self.cube_array(n, budget))

    def to_spec(self, base_dir=None) -> dict:
        raise NotImplementedError


# D1(G)


def _simple_values(G: GroupTable, a: np.ndarray) -> np.ndarray:
    """Vertex tables ``a_0 a_1^{v_1} ... a_n^{v_n}`` for rows ``(a_0, ..., a_n)``."""
    m = G.mult
    n = a.shape[1] - 1
    out = np.empty((a.shape[0], 1 << n), dtype=np.int64)
    out[:, 0] = a[:, 0]
    for v in range(1, 1 << n):
        hi = v.bit_length()
        out[:, v] = m[out[:, v ^ (1 << (hi - 1))], a[:, hi]]
    return out


class D1(CubeStructure):
    """The simple cubes ``v -> a_0 a_1^{v_1} ... a_n^{v_n}`` of a group."""

    kind = "D1"

    def __init__(self, G: GroupTable, group_path: str | None = None):
        self.G = G
        self.size = G.order
        self.group_path = group_path

    def __repr__(self) -> str:
        return f"D1(order {self.G.order})"

    def parameters(self, cubes: np.ndarray) -> np.ndarray:
        """``(a_0, ..., a_n)`` reconstructed from the values on ``{0,1}^n_1``."""
        n = cube_dim(cubes.shape[1])
        a = np.empty((cubes.shape[0], n + 1), dtype=np.int64)
        a[:, 0] = cubes[:, 0]
        inv0 = self.G.inv[cubes[:, 0]]
        for i in range(1, n + 1):
            a[:, i] = self.G.mult[inv0, cubes[:, unit(i)]]
        return a

    def _contains_many(self, cubes, n):
        return (_simple_values(self.G, self.parameters(cubes)) == cubes).all(axis=1)

    def completions(self, corner):
        n = self.check_corner(corner)
        if n == 1:
            return list(range(self.size))
        full = np.array([list(corner) + [0]], dtype=np.int64)
        x = int(_simple_values(self.G, self.parameters(full))[0, -1])
        return [x]

    def enumeration_cost(self, n):
        return self.size ** (n + 1) * (1 << n)

    def _enumerate_array(self, n):
        a = np.array(list(itertools.product(range(self.size), repeat=n + 1)), dtype=np.int64).reshape(-1, n + 1)
        return _simple_values(self.G, a)

    def to_spec(self, base_dir=None):
        return {"kind": "D1", "group": _group_ref(self.G, self.group_path)}


# D_k(A)


def alternating_sum(A: GroupTable, cubes: np.ndarray) -> np.ndarray:
    """``w(c) = sum_v (-1)^{h(v)} c(v)`` for each row, in the abelian group ``A``."""
    m, inv = A.mult, A.inv
    acc = np.full(cubes.shape[0], A.identity, dtype=np.int64)
    for v in range(cubes.shape[1]):
        col = cubes[:, v]
        acc = m[acc, col if height(v) % 2 == 0 else inv[col]]
    return acc


class Dk(CubeStructure):
    """Cubes of degree k on an abelian group: ``w(c ∘ s_v) = 0`` whenever ``h(v) > k``."""

    kind = "Dk"

    def __init__(self, A: GroupTable, k: int, group_path: str | None = None):
        if not A.is_abelian():
            raise ValueError("the degree-k structure needs an abelian group")
        if k < 1:
            raise ValueError("degree k must be at least 1")
        self.A = A
        self.k = k
        self.size = A.order
        self.group_path = group_path

    def __repr__(self) -> str:
        return f"D{self.k}(order {self.A.order})"

    def _contains_many(self, cubes, n):
        ok = np.ones(cubes.shape[0], dtype=bool)
        for v in range(1 << n):
            if height(v) > self.k:
                ok &= alternating_sum(self.A, cubes[:, _sub_index(n, v)]) == self.A.identity
        return ok

    def _top_value(self, cubes: np.ndarray, v: int) -> np.ndarray:
        """The unique value at ``v`` making ``w(c ∘ s_v)`` vanish, from values below ``v``."""
        m, inv = self.A.mult, self.A.inv
        acc = np.full(cubes.shape[0], self.A.identity, dtype=np.int64)
        for u in range(v):
            if u & v == u:
                col = cubes[:, u]
                acc = m[acc, col if height(u) % 2 == 0 else inv[col]]
        return acc if height(v) % 2 else inv[acc]

    def completions(self, corner):
        n = self.check_corner(corner)
        if n <= self.k:
            return list(range(self.size))
        full = np.array([list(corner) + [0]], dtype=np.int64)
        return [int(self._top_value(full, top(n))[0])]

    def enumeration_cost(self, n):
        return self.size ** len(low_hull(n, self.k)) * (1 << n)

    def _enumerate_array(self, n):
        low = low_hull(n, self.k)
        free = np.array(list(itertools.product(range(self.size), repeat=len(low))), dtype=np.int64).reshape(-1, len(low))
        out = np.zeros((free.shape[0], 1 << n), dtype=np.int64)
        out[:, low] = free
        for v in vertices_by_height(n):
            if height(v) > self.k:
                out[:, v] = self._top_value(out, v)
        return out

    def to_spec(self, base_dir=None):
        return {"kind": "Dk", "group": _group_ref(self.A, self.group_path), "k": self.k}


# H_{Z,k}(G)


class HZk(CubeStructure):
    """Pointwise products ``g f`` with ``g`` a simple cube of G and ``f`` a degree-k cube of a central Z."""

    kind = "HZk"

    def __init__(self, G: GroupTable, Z: Sequence[int], k: int, group_path: str | None = None):
        Z = sorted(set(int(z) for z in Z))
        if not G.is_subgroup(Z):
            raise ValueError("Z is not a subgroup")
        if len(Z) < 2:
            raise ValueError("Z must be a non-trivial subgroup")
        centre = set(G.center())
        if not set(Z) <= centre:
            raise ValueError("Z is not central")
        self.G = G
        self.Z = Z
        self.k = k
        self.size = G.order
        self.group_path = group_path
        self.Zt, _ = G.subgroup(Z)
        self.d1 = D1(G)
        self.dk = Dk(self.Zt, k)
        self.Q, self.proj = G.quotient(Z)
        zpos = np.full(G.order, -1, dtype=np.int64)
        zpos[Z] = np.arange(len(Z))
        self._zpos = zpos

    def __repr__(self) -> str:
        return f"HZk(order {self.G.order}, |Z|={len(self.Z)}, k={self.k})"

    def lift_difference(self, cubes: np.ndarray) -> np.ndarray:
        """``g_0(v)^{-1} c(v)`` for the simple cube ``g_0`` agreeing with ``c`` on ``{0,1}^n_1``."""
        g0 = _simple_values(self.G, self.d1.parameters(cubes))
        return self.G.mult[self.G.inv[g0], cubes]

    def _contains_many(self, cubes, n):
        z = self._zpos[self.lift_difference(cubes)]
        ok = (z >= 0).all(axis=1)
        if ok.any():
            ok[ok] = self.dk.contains_many(z[ok])
        return ok

    def contains_search(self, c: Sequence[int]) -> bool:
        """Slow existential test: some simple cube g with ``g^{-1} c`` a degree-k cube of Z."""
        n = cube_dim(len(c))
        if n > 2:
            raise DimensionError("the search oracle is limited to n <= 2")
        c = np.asarray(c, dtype=np.int64)
        for g in self.d1.cube_array(n):
            z = self._zpos[self.G.mult[self.G.inv[g], c]]
            if (z >= 0).all() and self.dk.contains(tuple(z.tolist())):
                return True
        return False

    def enumeration_cost(self, n):
        free = sum(1 for v in range(1 << n) if 2 <= height(v) <= self.k)
        return self.size ** (n + 1) * len(self.Z) ** free * (1 << n) + self.dk.enumeration_cost(n)

    def _enumerate_array(self, n):
        # c <-> (g_0, z) with z trivial on {0,1}^n_1 is a bijection
        g = self.d1.cube_array(n)
        low1 = [v for v in range(1 << n) if height(v) <= 1]
        z = self.dk.cube_array(n)
        z = z[(z[:, low1] == self.Zt.identity).all(axis=1)]
        zg = np.asarray(self.Z, dtype=np.int64)[z]
        return self.G.mult[g[:, None, :], zg[None, :, :]].reshape(-1, 1 << n)

    def to_spec(self, base_dir=None):
        return {"kind": "HZk", "group": _group_ref(self.G, self.group_path), "center": list(self.Z), "k": self.k}


# explicit structures


class Stored(CubeStructure):
    """Explicit cube sets for dimensions ``0..max_dim``."""

    kind = "stored"

    def __init__(self, size: int, cubes: Mapping[int, Sequence[Sequence[int]]], max_dim: int | None = None):
        self.size = int(size)
        if self.size < 1:
            raise ValueError("ground set must be non-empty")
        dims = sorted(int(n) for n in cubes)
        self._max = max(dims) if max_dim is None else int(max_dim)
        self._arrays = {}
        for n in range(self._max + 1):
            if n not in cubes and str(n) not in cubes:
                raise ValueError(f"stored structure is missing dimension {n}")
            rows = cubes[n] if n in cubes else cubes[str(n)]
            arr = np.asarray(rows, dtype=np.int64).reshape(-1, 1 << n)
            if arr.size and (arr.min() < 0 or arr.max() >= self.size):
                raise ValueError(f"dimension {n} has a value outside the ground set")
            codes = encode_rows(arr, self.size)
            codes, first = np.unique(codes, return_index=True)
            arr = arr[first]
            arr.setflags(write=False)
            self._arrays[n] = (arr, codes)
        if self._max >= 0 and len(self._arrays[0][0]) != self.size:
            raise ValueError("C^0 must contain every point")
        if self._max >= 1 and len(self._arrays[1][0]) != self.size**2:
            raise ValueError("C^1 must contain every pair of points")

    def __repr__(self) -> str:
        return f"Stored(size {self.size}, max_dim {self._max})"

    def max_dim(self):
        return self._max

    def _contains_many(self, cubes, n):
        return np.isin(encode_rows(cubes, self.size), self._arrays[n][1])

    def enumeration_cost(self, n):
        return len(self._arrays[n][0])

    def _enumerate_array(self, n):
        return self._arrays[n][0]

    def to_spec(self, base_dir=None):
        return {
            "kind": "stored",
            "size": self.size,
            "max_dim": self._max,
            "cubes": {str(n): self._arrays[n][0].tolist() for n in range(self._max + 1)},
        }

    @classmethod
    def from_structure(cls, X: CubeStructure, max_dim: int, budget: int | None = None) -> "Stored":
        return cls(X.size, {n: X.cube_array(n, budget) for n in range(max_dim + 1)}, max_dim)


# constructions


def general_to_simple(G: GroupTable, system: Sequence[Sequence[int]]) -> tuple[int, list[int]]:
    """Rewrite ``v -> prod_i a_{i,v_i}`` as ``v -> c prod_i h_i^{v_i}``.

    ``system[i-1] = (a_{i,0}, a_{i,1})``. Returns ``(c, [h_1, ..., h_n])``,
    verified at every vertex.
    """
    c = G.identity
    hs: list[int] = []
    for a0, a1 in system:
        c = G.mul(c, a0)
        hs = [G.conj(h, a0) for h in hs]
        hs.append(G.mul(G.inverse(a0), a1))
    n = len(system)
    for v in range(1 << n):
        lhs = G.product(system[i - 1][bit(v, i)] for i in range(1, n + 1))
        rhs = G.product([c] + [hs[i - 1] for i in range(1, n + 1) if bit(v, i)])
        if lhs != rhs:
            raise AssertionError(f"rewriting failed at vertex {Vertex(n, v)}")
    return c, hs


def general_cube(G: GroupTable, system: Sequence[Sequence[int]]) -> tuple[int, ...]:
    n = len(system)
    return tuple(G.product(system[i - 1][bit(v, i)] for i in range(1, n + 1)) for v in range(1 << n))


def glue_simplicial(X: CubeStructure, S: SimplicialSet, f: Mapping[int, int]) -> tuple[int, ...]:
    """Extend a cube-preserving map on ``S`` to an n-cube.

    Missing vertices are filled in order of increasing height, each with the
    least completion of the corner on the sub-cube it spans.
    """
    n = S.n
    if set(f) != set(S.members):
        raise ValueError("map must be defined exactly on the simplicial set")
    for v in S.maximal():
        sv = simplicial(Vertex(n, v))
        if not X.contains(tuple(f[w] for w in sv.table)):
            raise ValueError(f"map is not cube-preserving on the maximal vertex {Vertex(n, v)}")
    values = dict(f)
    for v in vertices_by_height(n):
        if v in values:
            continue
        sv = simplicial(Vertex(n, v))
        corner = [values[w] for w in sv.table[:-1]]
        options = X.completions(corner)
        if not options:
            raise ValueError(f"no completion at vertex {Vertex(n, v)}; the structure fails the completion axiom")
        values[v] = options[0]
    return tuple(values[v] for v in range(1 << n))


# loading


def _group_ref(G: GroupTable, path: str | None):
    return path if path is not None else G.to_json()


def _load_group(ref, base_dir: Path) -> tuple[GroupTable, str | None]:
    if isinstance(ref, dict):
        return GroupTable.from_json(ref), None
    p = Path(ref)
    if not p.is_absolute():
        p = base_dir / p
    return GroupTable.load(p), str(ref)


def structure_from_spec(spec: dict, base_dir=".") -> CubeStructure:
    base = Path(base_dir)
    kind = spec.get("kind")
    if kind == "D1":
        G, ref = _load_group(spec["group"], base)
        return D1(G, ref)
    if kind == "Dk":
        A, ref = _load_group(spec["group"], base)
        return Dk(A, int(spec["k"]), ref)
    if kind == "HZk":
        G, ref = _load_group(spec["group"], base)
        return HZk(G, spec["center"], int(spec["k"]), ref)
    if kind == "stored":
        cubes = {int(n): rows for n, rows in spec["cubes"].items()}
        size = spec.get("size")
        if size is None:
            size = len(cubes.get(0, []))
        return Stored(int(size), cubes, spec.get("max_dim"))
    raise ValueError(f"unknown structure kind {kind!r}")


def load_structure(path) -> CubeStructure:
    p = Path(path)
    return structure_from_spec(json.loads(p.read_text()), p.parent)
