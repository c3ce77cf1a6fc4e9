"""Groupspace algebra: axiom checks, cube composition, equivalences, factors, structure groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._common import DEFAULT_ENUM_BUDGET, BudgetExceeded, UnionFind, check_budget, cube_dim, encode_rows
from .cubes import (
    Category,
    CubeMorphism,
    bit,
    extend_by_constant,
    face,
    height,
    hom,
    in_category,
    projection,
    reflection,
    top,
    transposition,
)
from .groups import GroupTable, find_isomorphism
from .structures import CubeStructure, Dk, Stored, face_of, pull

CHUNK = 1 << 18


class ClassificationError(RuntimeError):
    """A structure violates the hypotheses of a recovery procedure."""


# partitions


@dataclass
class Partition:
    labels: list[int]

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def num_classes(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for x, c in enumerate(self.labels):
            out[c].append(x)
        return out

    def to_json(self) -> dict:
        return {"size": self.size, "labels": list(self.labels), "classes": self.classes()}


def _partition_from_pairs(n: int, a: np.ndarray, b: np.ndarray, what: str) -> Partition:
    """Partition generated by the pairs ``(a[t], b[t])``; they must already form an equivalence."""
    uf = UnionFind(n)
    for x, y in zip(a.tolist(), b.tolist()):
        uf.union(x, y)
    labels = uf.labels()
    sizes = np.bincount(labels, minlength=max(labels) + 1 if labels else 0)
    distinct = len(np.unique(np.asarray(a, dtype=np.int64) * n + np.asarray(b, dtype=np.int64)))
    if distinct != int((sizes.astype(np.int64) ** 2).sum()):
        raise ClassificationError(f"{what} is not an equivalence relation on this structure")
    return Partition(labels)


# membership helpers


def _contains_chunked(X: CubeStructure, rows: np.ndarray) -> np.ndarray:
    out = np.empty(rows.shape[0], dtype=bool)
    for s in range(0, rows.shape[0], CHUNK):
        out[s : s + CHUNK] = X.contains_many(rows[s : s + CHUNK])
    return out


def _index_of(X: CubeStructure, rows: np.ndarray, n: int, budget=None) -> np.ndarray:
    """Positions of cube rows in ``X.cube_array(n)``; -1 for rows that are not enumerated cubes."""
    codes = X.cube_codes(n, budget)
    q = encode_rows(rows, X.size)
    pos = np.searchsorted(codes, q)
    pos = np.minimum(pos, len(codes) - 1)
    found = codes[pos] == q
    return np.where(found, pos, -1).astype(np.int64)


def enumerate_corners(X: CubeStructure, n: int, budget: int | None = None) -> np.ndarray:
    """All corners of dimension n: maps on ``{0,1}^n`` minus ``1^n`` whose lower faces are cubes.

    Built by joining the lower faces one at a time on their shared vertices.
    """
    if n < 1:
        raise ValueError("corners need n >= 1")
    R = X.cube_array(n - 1, budget)
    faces = [face(n, i, 0).table for i in range(1, n + 1)]
    P = np.full((len(R), 1 << n), -1, dtype=np.int64)
    P[:, list(faces[0])] = R
    assigned = set(faces[0])
    limit = check_budget("corner enumeration", 0, budget, DEFAULT_ENUM_BUDGET)
    for F in faces[1:]:
        ov = [p for p, v in enumerate(F) if v in assigned]
        kP = encode_rows(P[:, [F[p] for p in ov]], X.size)
        kR = encode_rows(R[:, ov], X.size)
        order = np.argsort(kR, kind="stable")
        kRs = kR[order]
        lo = np.searchsorted(kRs, kP, side="left")
        hi = np.searchsorted(kRs, kP, side="right")
        cnt = (hi - lo).astype(np.int64)
        total = int(cnt.sum())
        if total * (1 << n) > limit:
            raise BudgetExceeded(f"enumerating {n}-corners of {X}", total * (1 << n), limit)
        rows = np.repeat(np.arange(len(P)), cnt)
        within = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        idx = order[np.repeat(lo, cnt) + within]
        P = P[rows]
        P[:, list(F)] = R[idx]
        assigned |= set(F)
    return P[:, :-1]


def completion_counts(X: CubeStructure, corners: np.ndarray) -> np.ndarray:
    """Number of completions of each corner row."""
    N, width = corners.shape
    counts = np.zeros(N, dtype=np.int64)
    per = max(1, CHUNK // X.size)
    xs = np.arange(X.size, dtype=np.int64)
    for s in range(0, N, per):
        block = corners[s : s + per]
        full = np.empty((len(block), X.size, width + 1), dtype=np.int64)
        full[:, :, :-1] = block[:, None, :]
        full[:, :, -1] = xs[None, :]
        ok = X.contains_many(full.reshape(-1, width + 1)).reshape(len(block), X.size)
        counts[s : s + per] = ok.sum(axis=1)
    return counts


# axioms


@dataclass
class AxiomReport:
    dim_cap: int
    category: str
    presheaf: dict = field(default_factory=dict)
    ergodicity: dict = field(default_factory=dict)
    completion: dict = field(default_factory=dict)
    step: int | None = None
    k_ergodic: int | None = None
    counts: dict = field(default_factory=dict)
    cross_checks: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            not self.errors
            and self.presheaf.get("pass") is True
            and self.ergodicity.get("pass") is True
            and all(c.get("pass") for c in self.completion.values())
            and all(v is not False for v in self.cross_checks.values())
        )

    def to_json(self) -> dict:
        return {
            "dim_cap": self.dim_cap,
            "category": self.category,
            "groupspace": self.ok,
            "presheaf": self.presheaf,
            "ergodicity": self.ergodicity,
            "completion": {str(n): v for n, v in sorted(self.completion.items())},
            "step": self.step if self.step is not None else "above cap",
            "k_ergodic": self.k_ergodic,
            "cube_counts": {str(n): v for n, v in sorted(self.counts.items())},
            "cross_checks": self.cross_checks,
            "errors": self.errors,
        }


def check_presheaf(X: CubeStructure, dim_cap: int, category: Category = "G", budget=None, skip_category: Category | None = None):
    """Pullbacks of every cube along every morphism between dimensions ``<= dim_cap``.

    Returns ``(ok, witness, checked)``; morphisms also in ``skip_category`` are not tried.
    """
    checked = 0
    for n in range(dim_cap + 1):
        C = X.cube_array(n, budget)
        for m in range(dim_cap + 1):
            known = X.cube_codes(m, budget)
            for phi in hom(m, n, category):
                if skip_category is not None and in_category(phi, skip_category):
                    continue
                pulled = C[:, list(phi.table)]
                codes = encode_rows(pulled, X.size)
                checked += len(C)
                suspect = ~np.isin(codes, known)
                if not suspect.any():
                    continue
                rows = np.nonzero(suspect)[0]
                bad = rows[~X.contains_many(pulled[rows])]
                if len(bad):
                    c = C[bad[0]].tolist()
                    return False, {"axiom": "presheaf", "morphism": phi.to_json(), "cube": c, "pullback": pulled[bad[0]].tolist()}, checked
    return True, None, checked


def find_nilspace_witness(X: CubeStructure, dim_cap: int, budget=None) -> dict | None:
    """A cube whose pullback along some N-morphism is not a cube, or ``None``.

    Transpositions are searched first, then every remaining morphism outside G.
    """
    for n in range(2, dim_cap + 1):
        C = X.cube_array(n, budget)
        for i, j in itertools.combinations(range(1, n + 1), 2):
            t = transposition(n, i, j)
            pulled = C[:, list(t.table)]
            bad = np.nonzero(~_contains_chunked(X, pulled))[0]
            if len(bad):
                return {"axiom": "presheaf", "category": "N", "morphism": t.to_json(), "cube": C[bad[0]].tolist(), "pullback": pulled[bad[0]].tolist()}
    ok, witness, _ = check_presheaf(X, dim_cap, "N", budget, skip_category="G")
    if not ok:
        witness["category"] = "N"
        return witness
    return None


def check_axioms(X: CubeStructure, dim_cap: int = 3, category: Category = "G", budget: int | None = None) -> AxiomReport:
    """Presheaf, ergodicity and completion up to ``dim_cap``, plus step and ergodicity degree."""
    cap = min(dim_cap, X.max_dim())
    rep = AxiomReport(dim_cap=cap, category=category)

    try:
        pts = np.arange(X.size, dtype=np.int64)
        pairs = np.stack(np.meshgrid(pts, pts, indexing="ij"), axis=-1).reshape(-1, 2)
        ok1 = X.contains_many(pairs) if cap >= 1 else np.ones(len(pairs), dtype=bool)
        ok0 = X.contains_many(pts[:, None])
        if not ok0.all():
            rep.ergodicity = {"pass": False, "witness": {"axiom": "ergodicity", "point": int(np.nonzero(~ok0)[0][0])}}
        elif not ok1.all():
            rep.ergodicity = {"pass": False, "witness": {"axiom": "ergodicity", "pair": pairs[np.nonzero(~ok1)[0][0]].tolist()}}
        else:
            rep.ergodicity = {"pass": True}
    except BudgetExceeded as e:
        rep.errors.append(str(e))

    try:
        ok, witness, checked = check_presheaf(X, cap, category, budget)
        rep.presheaf = {"pass": ok, "checked": checked, "witness": witness}
    except BudgetExceeded as e:
        rep.errors.append(str(e))

    for n in range(cap + 1):
        try:
            rep.counts[n] = X.count(n, budget)
        except BudgetExceeded as e:
            rep.errors.append(str(e))
    rep.k_ergodic = 0
    for n in range(1, cap + 1):
        if rep.counts.get(n) == X.size ** (1 << n):
            rep.k_ergodic = n
        else:
            break

    unique_at: dict[int, bool] = {}
    corners_at: dict[int, np.ndarray] = {}
    for n in range(1, cap + 1):
        try:
            K = enumerate_corners(X, n, budget)
            cnt = completion_counts(X, K)
        except BudgetExceeded as e:
            rep.errors.append(str(e))
            continue
        corners_at[n] = K
        entry = {"pass": bool((cnt >= 1).all()), "corners": int(len(K)), "min": int(cnt.min()), "max": int(cnt.max())}
        if not entry["pass"]:
            entry["witness"] = {"axiom": "completion", "n": n, "corner": K[np.nonzero(cnt == 0)[0][0]].tolist()}
        elif cnt.max() > 1:
            entry["multiple"] = {"n": n, "corner": K[np.nonzero(cnt > 1)[0][0]].tolist(), "completions": int(cnt.max())}
        rep.completion[n] = entry
        unique_at[n] = bool((cnt == 1).all())
    for n in sorted(unique_at):
        if unique_at[n] and all(k in unique_at for k in range(1, n)):
            rep.step = n - 1
            break

    rep.cross_checks["down_det"] = _down_det_check(X, cap)
    rep.cross_checks["up_det"] = _up_det_check(X, cap, rep.step, corners_at)
    return rep


def _down_det_check(X: CubeStructure, cap: int, limit: int = 200_000) -> bool | None:
    """A map on ``{0,1}^n`` is a cube iff its pullback along the first-n projection of ``{0,1}^cap`` is."""
    tested = False
    for n in range(1, cap):
        if X.size ** (1 << n) > limit:
            break
        allmaps = np.array(list(itertools.product(range(X.size), repeat=1 << n)), dtype=np.int64)
        p = projection(cap, range(1, n + 1))
        if not np.array_equal(_contains_chunked(X, allmaps), _contains_chunked(X, allmaps[:, list(p.table)])):
            return False
        tested = True
    return True if tested else None


def _up_det_check(X: CubeStructure, cap: int, step: int | None, corners_at: dict) -> bool | None:
    """For a k-step structure and n >= k+2: cubes are the corner extensions whose top (k+1)-face is a cube."""
    if step is None:
        return None
    tested = False
    for n in range(step + 2, cap + 1):
        K = corners_at.get(n)
        if K is None:
            continue
        full = np.repeat(K, X.size, axis=0)
        full = np.concatenate([full, np.tile(np.arange(X.size), len(K))[:, None]], axis=1)
        phi = extend_by_constant(step + 1, n, 1)
        if not np.array_equal(_contains_chunked(X, full), _contains_chunked(X, full[:, list(phi.table)])):
            return False
        tested = True
    return True if tested else None


# composition and equivalences


def composable(c1: Sequence[int], c2: Sequence[int], j: int) -> bool:
    return face_of(c1, j, 1) == face_of(c2, j, 0)


def _compose_rows(c1: np.ndarray, c2: np.ndarray, j: int) -> np.ndarray:
    n = cube_dim(c1.shape[-1])
    side = np.array([bit(v, j) for v in range(1 << n)], dtype=bool)
    return np.where(side, c2, c1)


def compose_cubes(X: CubeStructure, c1: Sequence[int], c2: Sequence[int], j: int) -> tuple[int, ...]:
    """``c1 ⊞_j c2``: keeps the (j,0)-face of ``c1`` and the (j,1)-face of ``c2``."""
    n = cube_dim(len(c1))
    if len(c2) != len(c1) or not 1 <= j <= n:
        raise ValueError("cubes must share a dimension n >= j")
    if not (X.contains(c1) and X.contains(c2)):
        raise ValueError("inputs must be cubes")
    if not composable(c1, c2, j):
        raise ValueError(f"cubes are not {j}-composable")
    out = tuple(int(x) for x in _compose_rows(np.asarray(c1), np.asarray(c2), j))
    if not X.contains(out):
        raise ClassificationError("composition is not a cube; the structure is not a groupspace")
    return out


def approx_classes(X: CubeStructure, n: int, i: int, budget=None) -> Partition:
    """``≈_i`` on ``C^n(X)`` (indexed as ``X.cube_array(n)``): opposite i-faces of an (n+1)-cube."""
    if not 1 <= i <= n + 1:
        raise ValueError(f"i must lie in [1, {n + 1}]")
    C1 = X.cube_array(n + 1, budget)
    a = _index_of(X, C1[:, list(face(n + 1, i, 0).table)], n, budget)
    b = _index_of(X, C1[:, list(face(n + 1, i, 1).table)], n, budget)
    if (a < 0).any() or (b < 0).any():
        raise ClassificationError("a face of an (n+1)-cube is not an n-cube")
    return _partition_from_pairs(X.count(n, budget), a, b, f"≈_{i}")


def sim_pairs(X: CubeStructure, i: int) -> np.ndarray:
    """Boolean matrix ``M[x, y]``: the map with ``x`` at ``1^{i+1}`` and ``y`` elsewhere is a cube."""
    n = i + 1
    pts = np.arange(X.size, dtype=np.int64)
    rows = np.repeat(pts, X.size)  # x
    cols = np.tile(pts, X.size)  # y
    maps = np.repeat(cols[:, None], 1 << n, axis=1)
    maps[:, top(n)] = rows
    return _contains_chunked(X, maps).reshape(X.size, X.size)


def sim_relation(X: CubeStructure, i: int) -> Partition:
    """``~_i`` on the points of X."""
    M = sim_pairs(X, i)
    a, b = np.nonzero(M)
    return _partition_from_pairs(X.size, a, b, f"~_{i}")


def quotient_structure(X: CubeStructure, i: int, dim_cap: int, budget=None) -> tuple[Stored, list[int]]:
    """``X/~_i`` with cubes pushed forward up to ``dim_cap``, plus the class map."""
    P = sim_relation(X, i)
    m = np.asarray(P.labels, dtype=np.int64)
    cubes = {n: m[X.cube_array(n, budget)] for n in range(dim_cap + 1)}
    return Stored(P.num_classes, cubes, dim_cap), list(P.labels)


@dataclass
class Fiber:
    members: list[int]
    structure: Stored

    def to_global(self, x: int) -> int:
        return self.members[x]

    def to_local(self, x: int) -> int:
        return self.members.index(x)


def unique_completion(X: CubeStructure, n: int, budget=None) -> bool:
    K = enumerate_corners(X, n, budget)
    return bool((completion_counts(X, K) == 1).all())


def fibers(X: CubeStructure, k: int, dim_cap: int | None = None, budget=None) -> list[Fiber]:
    """The ``~_{k-1}`` classes of a k-step structure, each with its inherited cubes."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cap = min(dim_cap if dim_cap is not None else k + 1, X.max_dim())
    if cap < k + 1 or not unique_completion(X, k + 1, budget):
        raise ClassificationError(f"structure is not {k}-step at the checked dimension")
    P = sim_relation(X, k - 1) if k >= 2 else Partition([0] * X.size)
    out = []
    for members in P.classes():
        loc = np.full(X.size, -1, dtype=np.int64)
        loc[members] = np.arange(len(members))
        cubes = {}
        for n in range(cap + 1):
            C = loc[X.cube_array(n, budget)]
            cubes[n] = C[(C >= 0).all(axis=1)]
        out.append(Fiber(members, Stored(len(members), cubes, cap)))
    return out


# recovery


def recover_group(X: CubeStructure, budget=None) -> GroupTable:
    """The group of a 1-step structure on its own points, with identity the least point."""
    e = 0
    n = X.size
    table = [[0] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            comps = X.completions((e, x, y))
            if len(comps) != 1:
                raise ClassificationError(f"corner ({e}, {x}, {y}) has {len(comps)} completions; not 1-step")
            table[x][y] = comps[0]
    G = GroupTable(table, validate=True)
    if G.identity != e:
        raise ClassificationError("recovered identity differs from the chosen point")
    for x in range(n):
        u = X.completions((x, e, e))
        if u != [G.inverse(x)]:
            raise ClassificationError(f"inverse of {x} disagrees with the corner completion")
    from .structures import D1

    if not np.array_equal(D1(G).cube_codes(2, budget), X.cube_codes(2, budget)):
        raise ClassificationError("2-cubes of the recovered group differ from the structure's 2-cubes")
    return G


@dataclass
class AbelianRecovery:
    """Result of recovering the abelian group of a k-step k-ergodic structure."""

    k: int
    i: int
    base_point: int
    classes: Partition  # ≈_i on C^k, indexed by cube_array(k)
    psi: list[int]  # point -> class
    psi_inv: list[int]  # class -> point
    ops: dict  # j -> class operation table
    identity_class: int
    table: GroupTable  # on the points, identity = base_point


def _q_cube(k: int, w: int, x: int, x0: int) -> list[int]:
    c = [x0] * (1 << k)
    c[w] = x
    return c


def _class_op(F: CubeStructure, k: int, j: int, labels: np.ndarray, budget=None) -> np.ndarray:
    """The ⊞_j operation on ≈ classes, checked for representative independence over all composable pairs."""
    C = F.cube_array(k, budget)
    f0 = encode_rows(C[:, list(face(k, j, 0).table)], F.size)
    f1 = encode_rows(C[:, list(face(k, j, 1).table)], F.size)
    order = np.argsort(f0, kind="stable")
    f0s = f0[order]
    lo = np.searchsorted(f0s, f1, side="left")
    hi = np.searchsorted(f0s, f1, side="right")
    cnt = hi - lo
    total = int(cnt.sum())
    check_budget("composable pairs", total * (1 << k), budget, DEFAULT_ENUM_BUDGET)
    left = np.repeat(np.arange(len(C)), cnt)
    right = order[np.repeat(lo, cnt) + (np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt))]
    comp = _compose_rows(C[left], C[right], j)
    pos = _index_of(F, comp, k, budget)
    if (pos < 0).any():
        raise ClassificationError("a composition of cubes is not a cube")
    nc = int(labels.max()) + 1
    op = np.full((nc, nc), -1, dtype=np.int64)
    la, lb, lr = labels[left], labels[right], labels[pos]
    op[la, lb] = lr
    if not (op[la, lb] == lr).all():
        raise ClassificationError(f"⊞_{j} depends on the chosen representatives")
    if (op < 0).any():
        raise ClassificationError(f"some pair of classes is not {j}-composable")
    return op


def composable_partner(F: CubeStructure, c: Sequence[int], target_class: int, labels: np.ndarray, j: int, budget=None) -> tuple[int, ...]:
    """A cube in the class ``target_class`` that ``c`` is j-composable with.

    Starts from ``c ∘ r_j`` and tries every value at the top vertex.
    """
    k = cube_dim(len(c))
    base = list(pull(c, reflection(k, j)))
    for x in range(F.size):
        cand = base[:-1] + [x]
        pos = _index_of(F, np.array([cand], dtype=np.int64), k, budget)[0]
        if pos >= 0 and labels[pos] == target_class:
            return tuple(cand)
    raise ClassificationError("no composable representative found")


def abelian_structure(F: CubeStructure, k: int, base_point: int = 0, i: int = 1, budget=None) -> AbelianRecovery:
    """Group structure on a k-step k-ergodic structure, k >= 2, from ``C^k/≈_i``."""
    if k < 2:
        raise ValueError("abelian recovery needs k >= 2")
    if F.count(k, budget) != F.size ** (1 << k):
        raise ClassificationError(f"structure is not {k}-ergodic")
    if not unique_completion(F, k + 1, budget):
        raise ClassificationError(f"structure is not {k}-step")
    P = approx_classes(F, k, i, budget)
    labels = np.asarray(P.labels, dtype=np.int64)
    if P.num_classes != F.size:
        raise ClassificationError(f"{P.num_classes} classes for {F.size} points")

    def cls_of(rows) -> np.ndarray:
        return labels[_index_of(F, np.asarray(rows, dtype=np.int64), k, budget)]

    psi_w = {}
    for w in range(1 << k):
        psi_w[w] = cls_of([_q_cube(k, w, x, base_point) for x in range(F.size)])
        if len(set(psi_w[w].tolist())) != F.size:
            raise ClassificationError(f"point-to-class map at vertex {w} is not a bijection")
    psi = psi_w[0]
    psi_inv = np.empty(F.size, dtype=np.int64)
    psi_inv[psi] = np.arange(F.size)
    E = int(cls_of([[base_point] * (1 << k)])[0])

    ops = {j: _class_op(F, k, j, labels, budget) for j in range(1, k + 1)}
    for j, op in ops.items():
        if not ((op[E] == np.arange(F.size)).all() and (op[:, E] == np.arange(F.size)).all()):
            raise ClassificationError(f"constant class is not the identity of ⊞_{j}")
        if not np.array_equal(op, ops[1]):
            raise ClassificationError(f"⊞_{j} and ⊞_1 differ")
    op = ops[1]
    if not np.array_equal(op, op.T):
        raise ClassificationError("class operation is not commutative")
    Y = GroupTable(op, validate=True)

    # sign law: the class of q_{w,x} is psi(x) or its inverse by parity of h(w)
    for w, pw in psi_w.items():
        expect = psi if height(w) % 2 == 0 else Y.inv[psi]
        if not np.array_equal(pw, expect):
            raise ClassificationError(f"sign law fails at vertex {w}")

    table = GroupTable(psi_inv[op[psi[:, None], psi[None, :]]], validate=True)
    if table.identity != base_point:
        raise ClassificationError("identity of the recovered group is not the base point")

    # class of a cube is psi of its alternating sum
    C = F.cube_array(k, budget)
    from .structures import alternating_sum

    if not np.array_equal(labels, psi[alternating_sum(table, C)]):
        raise ClassificationError("cube classes disagree with alternating sums")
    # (k+1)-cubes are exactly those of the degree-k structure on the recovered group
    if not np.array_equal(Dk(table, k).cube_codes(k + 1, budget), F.cube_codes(k + 1, budget)):
        raise ClassificationError("(k+1)-cubes differ from the degree-k structure of the recovered group")
    return AbelianRecovery(k, i, base_point, P, psi.tolist(), psi_inv.tolist(), {j: o.tolist() for j, o in ops.items()}, E, table)


def recover_abelian(F: CubeStructure, k: int, base_point: int = 0, i: int = 1, budget=None) -> GroupTable:
    return abelian_structure(F, k, base_point, i, budget).table


# tower


@dataclass
class TowerLevel:
    level: int
    structure: Stored
    projection: list[int]
    group: GroupTable
    abelian: bool
    fiber_sizes: list[int] = field(default_factory=list)
    fibers_isomorphic: bool | None = None
    transport_ok: bool | None = None

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "size": self.structure.size,
            "projection": self.projection,
            "group": self.group.to_json(),
            "group_order": self.group.order,
            "abelian": self.abelian,
            "fiber_sizes": self.fiber_sizes,
            "fibers_isomorphic": self.fibers_isomorphic,
            "transport_ok": self.transport_ok,
        }


@dataclass
class StructureTower:
    levels: list[TowerLevel]
    projections_compatible: bool

    @property
    def ok(self) -> bool:
        return self.projections_compatible and all(
            lv.fibers_isomorphic is not False and lv.transport_ok is not False and (lv.level < 2 or lv.abelian) for lv in self.levels
        )

    def to_json(self) -> dict:
        return {"levels": [lv.to_json() for lv in self.levels], "projections_compatible": self.projections_compatible, "ok": self.ok}


def fiber_transport(X: CubeStructure, k: int, A: Fiber, B: Fiber, recA: AbelianRecovery, recB: AbelianRecovery, budget=None) -> list[int]:
    """Isomorphism between the recovered groups of two fibers, induced by ≈_1 on ``C^k(X)``.

    Returned as a point map ``A -> B`` (local indices); raises if it is not a well-defined isomorphism.
    """
    P = np.asarray(approx_classes(X, k, 1, budget).labels, dtype=np.int64)

    def global_labels(fib: Fiber, rec: AbelianRecovery) -> np.ndarray:
        members = np.asarray(fib.members, dtype=np.int64)
        C = members[fib.structure.cube_array(k, budget)]
        g = P[_index_of(X, C, k, budget)]
        local = np.asarray(rec.classes.labels, dtype=np.int64)
        out = np.full(fib.structure.size, -1, dtype=np.int64)
        for cl, gl in zip(local.tolist(), g.tolist()):
            if out[cl] not in (-1, gl):
                raise ClassificationError("a fiber class meets two global classes")
            out[cl] = gl
        return out

    ga, gb = global_labels(A, recA), global_labels(B, recB)
    inv_b = {g: c for c, g in enumerate(gb.tolist())}
    if len(inv_b) != len(gb) or set(ga.tolist()) != set(inv_b):
        raise ClassificationError("≈_1 transport is not a bijection between fibers")
    cls_map = np.array([inv_b[g] for g in ga.tolist()], dtype=np.int64)  # Y_A -> Y_B
    point_map = [recB.psi_inv[cls_map[recA.psi[x]]] for x in range(A.structure.size)]
    TA, TB = recA.table, recB.table
    for x in range(TA.order):
        for y in range(TA.order):
            if point_map[TA.mul(x, y)] != TB.mul(point_map[x], point_map[y]):
                raise ClassificationError("≈_1 transport is not a homomorphism")
    return point_map


def structure_tower(X: CubeStructure, k_cap: int, dim_cap: int | None = None, budget=None) -> StructureTower:
    cap = dim_cap if dim_cap is not None else max(3, k_cap + 1)
    levels = []
    for i in range(1, k_cap + 1):
        Xi, proj = quotient_structure(X, i, cap, budget)
        if i == 1:
            G = recover_group(Xi, budget)
            levels.append(TowerLevel(1, Xi, proj, G, G.is_abelian(), [Xi.size]))
            continue
        fibs = fibers(Xi, i, cap, budget)
        recs = [abelian_structure(f.structure, i, 0, 1, budget) for f in fibs]
        iso = all(find_isomorphism(recs[0].table, r.table) is not None for r in recs[1:])
        transport = True
        for f, r in zip(fibs[1:], recs[1:]):
            try:
                fiber_transport(Xi, i, fibs[0], f, recs[0], r, budget)
            except ClassificationError:
                transport = False
        G = recs[0].table
        levels.append(TowerLevel(i, Xi, proj, G, G.is_abelian(), [f.structure.size for f in fibs], iso, transport))

    compatible = True
    maps = {0: [0] * X.size}
    maps.update({lv.level: lv.projection for lv in levels})
    for hi in maps:
        for lo in maps:
            if lo >= hi:
                continue
            pi = {}
            for x in range(X.size):
                a, b = maps[hi][x], maps[lo][x]
                if pi.setdefault(a, b) != b:
                    compatible = False
    return StructureTower(levels, compatible)


# fiber action


def fiber_of(X: CubeStructure, k: int, x: int, dim_cap: int | None = None, budget=None) -> Fiber:
    for f in fibers(X, k, dim_cap, budget):
        if x in f.members:
            return f
    raise ValueError(f"point {x} lies in no fiber")


def action_by_class(F: CubeStructure, k: int, labels: Sequence[int], budget=None) -> np.ndarray:
    """``T[a, x]`` = the value at ``0^k`` of the cube in class ``a`` equal to ``x`` elsewhere."""
    nc = max(labels) + 1
    T = np.full((nc, F.size), -1, dtype=np.int64)
    lab = np.asarray(labels, dtype=np.int64)
    for x in range(F.size):
        rows = np.full((F.size, 1 << k), x, dtype=np.int64)
        rows[:, 0] = np.arange(F.size)
        cls = lab[_index_of(F, rows, k, budget)]
        if len(set(cls.tolist())) != F.size:
            raise ClassificationError("action is not well defined")
        T[cls, x] = np.arange(F.size)
    return T


def fiber_action(X: CubeStructure, k: int, a: int, x: int, base_point: int | None = None, dim_cap=None, budget=None) -> int:
    """``x^a`` where ``a`` is a point of x's fiber read as an element of its recovered group.

    The group is recovered with ``base_point`` (default: the least point of the fiber) as identity.
    """
    fib = fiber_of(X, k, x, dim_cap, budget)
    if a not in fib.members:
        raise ValueError(f"{a} is not an element of the fiber group of {x}")
    bp = fib.to_local(base_point) if base_point is not None else 0
    rec = abelian_structure(fib.structure, k, bp, 1, budget)
    T = action_by_class(fib.structure, k, rec.classes.labels, budget)
    return fib.to_global(int(T[rec.psi[fib.to_local(a)], fib.to_local(x)]))


def verify_fiber_action(X: CubeStructure, k: int, dim_cap=None, budget=None) -> dict:
    """Free, transitive, abelian action on every fiber, the same for every base point."""
    report = {"fibers": [], "ok": True}
    for fib in fibers(X, k, dim_cap, budget):
        F = fib.structure
        recs = [abelian_structure(F, k, b, 1, budget) for b in range(F.size)]
        labels = recs[0].classes.labels
        T = action_by_class(F, k, labels, budget)
        op = np.asarray(recs[0].ops[1])
        E = recs[0].identity_class
        ident = np.array_equal(T[E], np.arange(F.size))
        compat = all(np.array_equal(T[op[A, B]], T[B][T[A]]) for A in range(len(T)) for B in range(len(T)))
        free_transitive = all(sorted(T[:, x].tolist()) == list(range(F.size)) for x in range(F.size))
        base_indep = True
        for rec in recs:
            # x + psi^{-1}(A) in the group with this base point must equal the class action
            tr = np.array([[rec.table.mul(x, rec.psi_inv[A]) for x in range(F.size)] for A in range(len(T))])
            base_indep &= bool(np.array_equal(tr, T)) and rec.classes.labels == labels
        entry = {
            "members": fib.members,
            "identity_trivial": bool(ident),
            "action_law": bool(compat),
            "free_transitive": bool(free_transitive),
            "abelian": bool(recs[0].table.is_abelian()),
            "base_point_independent": bool(base_indep),
        }
        entry["ok"] = all(v for key, v in entry.items() if key != "members")
        report["ok"] &= entry["ok"]
        report["fibers"].append(entry)
    return report
