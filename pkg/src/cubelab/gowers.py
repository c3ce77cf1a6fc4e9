"""Non-commutative Gowers norms on finite groups.

Cubic products average ``prod_v J^{h(v)} f_v(a_0 a_1^{v_1} ... a_n^{v_n})`` over
uniform ``(a_0, ..., a_n)``, where ``J`` is complex conjugation. Exact sums use
``math.fsum`` on real and imaginary parts, so the result does not depend on how
the parameter space is split into blocks.

Monte-Carlo sampling uses numpy's PCG64 generator. Sample block ``b`` draws from
``SeedSequence(seed, spawn_key=(b,))``, so estimates are reproducible and do not
depend on how blocks are distributed over workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ._common import DEFAULT_BUDGET, DEFAULT_ENUM_BUDGET, check_budget, encode_rows
from .cubes import bit, height
from .groups import GroupTable

BLOCK_ROWS = 1 << 16
MC_BLOCK = 4096
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class GroupFunction:
    group: GroupTable
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128).copy()
        if vals.shape != (self.group.order,):
            raise ValueError(f"need {self.group.order} values, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __add__(self, other: "GroupFunction") -> "GroupFunction":
        _same_group(self.group, other.group)
        return GroupFunction(self.group, self.values + other.values)

    def scale(self, c: complex) -> "GroupFunction":
        return GroupFunction(self.group, c * self.values)

    def to_json(self, group_ref=None) -> dict:
        return {
            "group": group_ref if group_ref is not None else self.group.to_json(),
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }


def constant(G: GroupTable, c: complex = 1.0) -> GroupFunction:
    return GroupFunction(G, np.full(G.order, c, dtype=np.complex128))


def load_function(path, group: GroupTable | None = None) -> GroupFunction:
    p = Path(path)
    obj = json.loads(p.read_text())
    if group is None:
        ref = obj["group"]
        if isinstance(ref, dict):
            group = GroupTable.from_json(ref)
        else:
            gp = Path(ref)
            group = GroupTable.load(gp if gp.is_absolute() else p.parent / gp)
    vals = [complex(re, im) for re, im in obj["values"]]
    return GroupFunction(group, np.array(vals))


def _same_group(G: GroupTable, H: GroupTable) -> None:
    if G is not H and G != H:
        raise ValueError("functions live on different groups")


@dataclass(frozen=True)
class FunctionSystem:
    n: int
    funcs: tuple[GroupFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        if len(self.funcs) != 1 << self.n:
            raise ValueError(f"need {1 << self.n} functions, got {len(self.funcs)}")
        for f in self.funcs[1:]:
            _same_group(self.funcs[0].group, f.group)

    @property
    def group(self) -> GroupTable:
        return self.funcs[0].group

    @classmethod
    def uniform(cls, f: GroupFunction, n: int) -> "FunctionSystem":
        """``[f]_n``: the same function at every vertex."""
        return cls(n, (f,) * (1 << n))


def _conjugated(F: FunctionSystem) -> np.ndarray:
    """``(2**n, |G|)`` value table with odd-height vertices conjugated."""
    return np.stack([np.conj(f.values) if height(v) % 2 else f.values for v, f in enumerate(F.funcs)])


def _tuple_block(order: int, width: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of ``G^width`` in lexicographic order (first entry most significant)."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), width), dtype=np.int64)
    for p in range(width - 1, -1, -1):
        out[:, p] = idx % order
        idx //= order
    return out


def _simple_vertices(G: GroupTable, a: np.ndarray) -> np.ndarray:
    n = a.shape[1] - 1
    m = G.mult
    out = np.empty((a.shape[0], 1 << n), dtype=np.int64)
    out[:, 0] = a[:, 0]
    for v in range(1, 1 << n):
        hi = v.bit_length()
        out[:, v] = m[out[:, v ^ (1 << (hi - 1))], a[:, hi]]
    return out


def _general_vertices(G: GroupTable, a: np.ndarray) -> np.ndarray:
    """Columns ``(a_{1,0}, a_{1,1}, ..., a_{n,0}, a_{n,1})`` to vertex tables ``prod_i a_{i,v_i}``."""
    n = a.shape[1] // 2
    m = G.mult
    out = np.empty((a.shape[0], 1 << n), dtype=np.int64)
    for v in range(1 << n):
        acc = a[:, bit(v, 1)] if n else np.full(a.shape[0], G.identity)
        for i in range(2, n + 1):
            acc = m[acc, a[:, 2 * (i - 1) + bit(v, i)]]
        out[:, v] = acc
    return out


def _products(table: np.ndarray, verts: np.ndarray) -> np.ndarray:
    prod = np.ones(verts.shape[0], dtype=np.complex128)
    for v in range(verts.shape[1]):
        prod *= table[v, verts[:, v]]
    return prod


def cubic_product(F: FunctionSystem, budget: int | None = None, blocks: int | None = None) -> complex:
    """Exact cubic product of a function system.

    ``blocks`` optionally splits the parameter space into that many contiguous
    index ranges; the result is the same for any split.
    """
    G, n = F.group, F.n
    total = G.order ** (n + 1)
    check_budget("exact cubic product", total * (1 << n), budget, DEFAULT_BUDGET)
    table = _conjugated(F)
    step = BLOCK_ROWS if blocks is None else max(1, -(-total // blocks))
    re, im = [], []
    for s in range(0, total, step):
        verts = _simple_vertices(G, _tuple_block(G.order, n + 1, s, min(total, s + step)))
        p = _products(table, verts)
        re.append(math.fsum(p.real))
        im.append(math.fsum(p.imag))
    return complex(math.fsum(re) / total, math.fsum(im) / total)


def cubic_product_general(F: FunctionSystem, budget: int | None = None) -> complex:
    """The same average taken over general cubes ``v -> prod_i a_{i,v_i}``."""
    G, n = F.group, F.n
    total = G.order ** (2 * n)
    check_budget("exact general cubic product", total * (1 << n), budget, DEFAULT_BUDGET)
    table = _conjugated(F)
    re, im = [], []
    for s in range(0, total, BLOCK_ROWS):
        verts = _general_vertices(G, _tuple_block(G.order, 2 * n, s, min(total, s + BLOCK_ROWS)))
        p = _products(table, verts)
        re.append(math.fsum(p.real))
        im.append(math.fsum(p.imag))
    return complex(math.fsum(re) / total, math.fsum(im) / total)


def cubic_sum_exact(F: FunctionSystem, variant: str = "simple") -> tuple[Fraction, Fraction]:
    """Exact rational average for Gaussian-integer valued systems, as ``(re, im)``."""
    G, n = F.group, F.n
    table = _conjugated(F)
    if not (np.all(table.real == np.round(table.real)) and np.all(table.imag == np.round(table.imag))):
        raise ValueError("exact sums need Gaussian-integer values")
    if np.abs(table).max() ** (1 << n) * G.order ** (2 * n) >= 2**62:
        raise ValueError("values too large for exact 64-bit accumulation")
    tre = table.real.astype(np.int64)
    tim = table.imag.astype(np.int64)
    if variant == "simple":
        width, make = n + 1, _simple_vertices
    elif variant == "general":
        width, make = 2 * n, _general_vertices
    else:
        raise ValueError(f"unknown variant {variant!r}")
    total = G.order**width
    check_budget("exact integer cubic sum", total * (1 << n), None, DEFAULT_ENUM_BUDGET)
    sre = sim = 0
    for s in range(0, total, BLOCK_ROWS):
        verts = make(G, _tuple_block(G.order, width, s, min(total, s + BLOCK_ROWS)))
        pre = np.ones(len(verts), dtype=np.int64)
        pim = np.zeros(len(verts), dtype=np.int64)
        for v in range(1 << n):
            a, b = tre[v, verts[:, v]], tim[v, verts[:, v]]
            pre, pim = pre * a - pim * b, pre * b + pim * a
        sre += int(pre.sum())
        sim += int(pim.sum())
    return Fraction(sre, total), Fraction(sim, total)


def _root(inner: complex, n: int, scale: float) -> float:
    tol = IMAG_TOL * max(1.0, scale)
    if abs(inner.imag) > tol or inner.real < -tol:
        raise ArithmeticError(f"self cubic product {inner} is not a non-negative real")
    return max(inner.real, 0.0) ** (1.0 / (1 << n))


def gowers_inner(f: GroupFunction, n: int, budget: int | None = None) -> complex:
    return cubic_product(FunctionSystem.uniform(f, n), budget)


def gowers_norm(f: GroupFunction, n: int, budget: int | None = None) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    inner = gowers_inner(f, n, budget)
    return _root(inner, n, float(np.abs(f.values).max()) ** (1 << n))


@dataclass(frozen=True)
class MCResult:
    estimate: float
    mean: complex
    stderr: float
    samples: int
    seed: int
    n: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "mean": [self.mean.real, self.mean.imag],
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "n": self.n,
        }


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _mc_products(f: GroupFunction, n: int, samples: int, seed: int) -> np.ndarray:
    G = f.group
    table = _conjugated(FunctionSystem.uniform(f, n))
    out = np.empty(samples, dtype=np.complex128)
    for b, s in enumerate(range(0, samples, MC_BLOCK)):
        m = min(MC_BLOCK, samples - s)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        a = rng.integers(0, G.order, size=(m, n + 1), dtype=np.int64)
        out[s : s + m] = _products(table, _simple_vertices(G, a))
    return out


def gowers_norm_mc(f: GroupFunction, n: int, samples: int, seed: int | None = None) -> MCResult:
    """Monte-Carlo estimate of the self cubic product and its root.

    ``stderr`` is the standard error of the real part of the sample mean.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if seed is None:
        seed = fresh_seed()
    p = _mc_products(f, n, samples, seed)
    mean = complex(math.fsum(p.real) / samples, math.fsum(p.imag) / samples)
    stderr = float(np.std(p.real, ddof=1) / math.sqrt(samples))
    est = max(mean.real, 0.0) ** (1.0 / (1 << n))
    return MCResult(est, mean, stderr, samples, int(seed), n)


def star(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """``(f ⋆ g)(x) = mean_y f(xy) conj(g(y))``."""
    _same_group(f.group, g.group)
    G = f.group
    return GroupFunction(G, f.values[G.mult] @ np.conj(g.values) / G.order)


def l2_norm(f: GroupFunction) -> float:
    return math.sqrt(math.fsum(np.abs(f.values) ** 2) / f.group.order)


def face_operator(F: FunctionSystem, d: int, r: int) -> FunctionSystem:
    """``g_v = f_{q(v)}`` where ``q`` forces coordinate ``d`` to ``r``."""
    if not 1 <= d <= F.n or r not in (0, 1):
        raise ValueError(f"bad face parameters d={d}, r={r} for n={F.n}")
    mask = 1 << (d - 1)
    return FunctionSystem(F.n, tuple(F.funcs[(v & ~mask) | (r * mask)] for v in range(1 << F.n)))


# cube distributions


@dataclass(frozen=True)
class CubeDistribution:
    k: int
    variant: str
    probs: dict

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "variant": self.variant,
            "support": len(self.probs),
            "probs": [[list(c), str(p)] for c, p in sorted(self.probs.items())],
        }


def cube_distribution(G: GroupTable, k: int, variant: str = "simple", budget: int | None = None) -> CubeDistribution:
    if variant == "simple":
        width, make = k + 1, _simple_vertices
    elif variant == "general":
        width, make = 2 * k, _general_vertices
    else:
        raise ValueError(f"unknown variant {variant!r}")
    total = G.order**width
    check_budget(f"{variant} cube distribution", total * (1 << k), budget, DEFAULT_ENUM_BUDGET)
    counts: dict[int, int] = {}
    rows: dict[int, tuple] = {}
    for s in range(0, total, BLOCK_ROWS):
        verts = make(G, _tuple_block(G.order, width, s, min(total, s + BLOCK_ROWS)))
        codes = encode_rows(verts, G.order)
        uq, first, cnt = np.unique(codes, return_index=True, return_counts=True)
        for c, i, m in zip(uq.tolist(), first.tolist(), cnt.tolist()):
            counts[c] = counts.get(c, 0) + m
            if c not in rows:
                rows[c] = tuple(verts[i].tolist())
    return CubeDistribution(k, variant, {rows[c]: Fraction(m, total) for c, m in counts.items()})


def total_variation(p: CubeDistribution, q: CubeDistribution) -> Fraction:
    keys = set(p.probs) | set(q.probs)
    return sum((abs(p.probs.get(c, Fraction(0)) - q.probs.get(c, Fraction(0))) for c in keys), Fraction(0)) / 2


def compare_distributions(G: GroupTable, k: int, budget: int | None = None) -> tuple[bool, Fraction]:
    """Exact comparison of the simple and general cube distributions."""
    p = cube_distribution(G, k, "simple", budget)
    q = cube_distribution(G, k, "general", budget)
    tv = total_variation(p, q)
    return p.probs == q.probs, tv


def random_function(G: GroupTable, rng: np.random.Generator) -> GroupFunction:
    return GroupFunction(G, rng.normal(size=G.order) + 1j * rng.normal(size=G.order))
