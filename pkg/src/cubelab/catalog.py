"""Stored tables for every group of order at most 8, plus a few larger ones."""

from __future__ import annotations

from pathlib import Path

from .groups import GroupTable, alternating, cyclic, dihedral, direct_product, quaternion8, symmetric

DATA_DIR = Path(__file__).parent / "data" / "groups"

# one representative per isomorphism type of order <= 8
SMALL_GROUPS = ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6", "S3", "Z7", "Z8", "Z4xZ2", "Z2xZ2xZ2", "D4", "Q8"]
EXTRA_GROUPS = ["Z9", "Z3xZ3", "D5", "Z10", "Z12", "Z6xZ2", "D6", "A4"]


def build(name: str) -> GroupTable:
    """Construct a catalog group from its name."""
    if name.startswith("Z") and "x" not in name:
        return cyclic(int(name[1:]))
    if "x" in name:
        factors = [build(part if part.startswith("Z") else "Z" + part) for part in name.split("x")]
        G = factors[0]
        for H in factors[1:]:
            G = direct_product(G, H)
        return G
    if name.startswith("D"):
        return dihedral(int(name[1:]))
    if name == "S3":
        return symmetric(3)
    if name == "A4":
        return alternating(4)
    if name == "Q8":
        return quaternion8()
    raise KeyError(name)


def load(name: str) -> GroupTable:
    return GroupTable.load(DATA_DIR / f"{name}.json")


def path(name: str) -> Path:
    return DATA_DIR / f"{name}.json"


def write_all() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for name in SMALL_GROUPS + EXTRA_GROUPS:
        build(name).save(DATA_DIR / f"{name}.json")


if __name__ == "__main__":
    write_all()
