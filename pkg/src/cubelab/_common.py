"""Shared plumbing: operation budgets, cube encoding, union-find."""

from __future__ import annotations

import os

import numpy as np

DEFAULT_BUDGET = 10**9
DEFAULT_ENUM_BUDGET = 2 * 10**7


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive computation would exceed its operation budget."""

    def __init__(self, what: str, cost: int, budget: int):
        super().__init__(f"{what}: estimated cost {cost} exceeds budget {budget}")
        self.what = what
        self.cost = cost
        self.budget = budget


def _env_budget() -> int | None:
    raw = os.environ.get("CUBELAB_BUDGET")
    if not raw:
        return None
    return int(float(raw))


def resolve_budget(budget: int | None, default: int = DEFAULT_BUDGET) -> int:
    if budget is not None:
        return int(budget)
    env = _env_budget()
    return env if env is not None else default


def check_budget(what: str, cost: int, budget: int | None, default: int = DEFAULT_BUDGET) -> int:
    limit = resolve_budget(budget, default)
    if cost > limit:
        raise BudgetExceeded(what, cost, limit)
    return limit


def cube_dim(length: int) -> int:
    """Dimension n of a vertex table with ``length == 2**n``."""
    if length < 1 or length & (length - 1):
        raise ValueError(f"vertex table length {length} is not a power of two")
    return length.bit_length() - 1


def encode_rows(arr: np.ndarray, base: int) -> np.ndarray:
    """Injective row encoding ``sum(arr[:, v] * base**v)``.

    Returns int64 codes when they fit, otherwise an object array of Python ints.
    """
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[None, :]
    width = arr.shape[1]
    base = max(base, 2)
    if width == 0:
        return np.zeros(arr.shape[0], dtype=np.int64)
    if base ** width < 2**63:
        weights = base ** np.arange(width, dtype=np.int64)
        return arr.astype(np.int64) @ weights
    out = np.empty(arr.shape[0], dtype=object)
    for r, row in enumerate(arr.tolist()):
        code = 0
        for x in reversed(row):
            code = code * base + int(x)
        out[r] = code
    return out


def encode_tuple(values, base: int) -> int:
    code = 0
    for x in reversed(values):
        code = code * max(base, 2) + int(x)
    return code


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x
        return True

    def labels(self) -> list[int]:
        """Class ids numbered by least member."""
        ids: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in ids:
                ids[r] = len(ids)
            out.append(ids[r])
        return out
