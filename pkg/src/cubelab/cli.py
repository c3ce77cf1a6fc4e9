"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 budget or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from ._common import DEFAULT_ENUM_BUDGET, BudgetExceeded, resolve_budget
from .algebra import (
    ClassificationError,
    check_axioms,
    fiber_action,
    fibers,
    find_nilspace_witness,
    structure_tower,
)
from .gowers import compare_distributions, fresh_seed, gowers_inner, gowers_norm, gowers_norm_mc, load_function
from .groups import GroupLawError, GroupTable, make_group, quotient_map_json
from .structures import D1, HZk, CornerError, Dk, load_structure

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class VerificationFailure(Exception):
    def __init__(self, result: dict):
        super().__init__("verification failed")
        self.result = result


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _ints(s: str) -> list[int]:
    return [int(t) for t in s.replace(" ", "").split(",") if t != ""]


def _load_group(path) -> GroupTable:
    return GroupTable.load(path)


# commands


def cmd_group(args, inputs: dict) -> dict:
    if args.action == "make":
        G = make_group(args.kind, args.n)
        if args.out:
            G.save(args.out)
        return {"order": G.order, "abelian": G.is_abelian(), "written": args.out, "group": None if args.out else G.to_json()}
    inputs[args.file] = _sha256(args.file)
    G = _load_group(args.file)
    if args.action == "show":
        return {"order": G.order, "identity": G.identity, "abelian": G.is_abelian(), "center": G.center(), "names": G.names}
    if args.action == "center":
        Z = G.center()
        return {"center": Z, "center_order": len(Z), "trivial": len(Z) == 1}
    if args.action == "quotient":
        N = _ints(args.subgroup) if args.subgroup else G.center()
        Q, proj = G.quotient(N)
        if args.out:
            Q.save(args.out)
        return {"subgroup": sorted(N), "order": Q.order, "abelian": Q.is_abelian(), "map": quotient_map_json(proj), "written": args.out}
    raise ValueError(f"unknown group action {args.action}")


def _structure(args, inputs):
    inputs[args.spec] = _sha256(args.spec)
    return load_structure(args.spec)


def cmd_structure(args, inputs: dict) -> dict:
    if args.action == "build":
        base = Path(args.out).parent if args.out else Path(".")
        inputs[args.group] = _sha256(args.group)
        G = _load_group(args.group)
        ref = str(Path(args.group).resolve().relative_to(base.resolve())) if _is_under(args.group, base) else str(Path(args.group).resolve())
        if args.kind == "D1":
            X = D1(G, ref)
        elif args.kind == "Dk":
            X = Dk(G, args.k, ref)
        elif args.kind == "HZk":
            X = HZk(G, _ints(args.center) if args.center else G.center(), args.k, ref)
        else:
            raise ValueError(f"unknown structure kind {args.kind}")
        spec = X.to_spec()
        if args.out:
            Path(args.out).write_text(json.dumps(spec, indent=1))
        return {"spec": spec, "written": args.out}
    X = _structure(args, inputs)
    if args.action == "axioms":
        rep = check_axioms(X, args.dim_cap, args.category, args.budget)
        result = {"report": rep.to_json()}
        if args.nilspace_witness:
            result["nilspace_witness"] = find_nilspace_witness(X, args.dim_cap, args.budget)
        if rep.errors:
            raise BudgetExceeded("; ".join(rep.errors), 0, resolve_budget(args.budget))
        if not rep.ok:
            raise VerificationFailure(result)
        return result
    if args.action == "complete":
        if args.corner:
            inputs[args.corner] = _sha256(args.corner)
            corner = json.loads(Path(args.corner).read_text())
        else:
            corner = _ints(args.values)
        try:
            comps = X.complete_corner(corner)
        except CornerError as e:
            raise VerificationFailure({"error": str(e), "face": e.face, "corner": corner})
        return {"corner": corner, "completions": [list(c) for c in comps], "count": len(comps)}
    if args.action == "enumerate":
        arr = X.cube_array(args.n, args.budget)
        out = {"n": args.n, "count": int(len(arr))}
        if args.list:
            out["cubes"] = arr.tolist()
        return out
    raise ValueError(f"unknown structure action {args.action}")


def _is_under(path, base: Path) -> bool:
    try:
        Path(path).resolve().relative_to(base.resolve())
        return True
    except ValueError:
        return False


def cmd_factor(args, inputs: dict) -> dict:
    X = _structure(args, inputs)
    if args.action == "tower":
        tower = structure_tower(X, args.k_cap, args.dim_cap, args.budget)
        result = tower.to_json()
        if not tower.ok:
            raise VerificationFailure(result)
        return result
    if args.action == "fibers":
        fibs = fibers(X, args.k, args.dim_cap, args.budget)
        out = []
        for f in fibs:
            rep = check_axioms(f.structure, min(args.dim_cap or args.k + 1, f.structure.max_dim()), "G", args.budget)
            out.append({"members": f.members, "groupspace": rep.ok, "step": rep.to_json()["step"], "k_ergodic": rep.k_ergodic})
        result = {"k": args.k, "fibers": out}
        if not all(e["groupspace"] and e["k_ergodic"] >= args.k for e in out):
            raise VerificationFailure(result)
        return result
    if args.action == "action":
        y = fiber_action(X, args.k, args.a, args.x, args.base_point, args.dim_cap, args.budget)
        return {"k": args.k, "a": args.a, "x": args.x, "result": y}
    raise ValueError(f"unknown factor action {args.action}")


def cmd_gowers(args, inputs: dict) -> dict:
    inputs[args.group] = _sha256(args.group)
    G = _load_group(args.group)
    if args.action == "dist-compare":
        equal, tv = compare_distributions(G, args.k, args.budget)
        result = {"k": args.k, "equal": equal, "tv_distance": str(tv)}
        if not equal:
            raise VerificationFailure(result)
        return result
    inputs[args.fn] = _sha256(args.fn)
    f = load_function(args.fn, G)
    if args.action == "exact":
        inner = gowers_inner(f, args.n, args.budget)
        norm = gowers_norm(f, args.n, args.budget)
        return {"n": args.n, "inner": [inner.real, inner.imag], "norm": norm, "budget": resolve_budget(args.budget)}
    if args.action == "mc":
        res = gowers_norm_mc(f, args.n, args.samples, args.seed)
        return res.to_json()
    raise ValueError(f"unknown gowers action {args.action}")


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=lambda s: int(float(s)), default=None, help="operation budget (default from CUBELAB_BUDGET or built-in)")
    common.add_argument("--threads", type=int, default=1, help="worker count (computations run single-threaded)")
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--output", choices=["json", "text"], default="json")
    common.add_argument("--report", default=None, help="also write the report to this file")

    p = argparse.ArgumentParser(prog="cubelab", description="Finite groupspaces, cube structures and Gowers norms.")
    p.add_argument("--version", action="version", version=f"cubelab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="build and inspect group tables")
    gs = g.add_subparsers(dest="action", required=True)
    mk = gs.add_parser("make", parents=[common])
    mk.add_argument("--kind", required=True, choices=["cyclic", "dihedral", "symmetric", "alternating", "quaternion8"])
    mk.add_argument("--n", type=int, default=None)
    mk.add_argument("-o", "--out", default=None)
    for name in ("show", "center"):
        sp = gs.add_parser(name, parents=[common])
        sp.add_argument("file")
    q = gs.add_parser("quotient", parents=[common])
    q.add_argument("file")
    q.add_argument("--subgroup", default=None, help="comma-separated element indices (default: the center)")
    q.add_argument("-o", "--out", default=None)

    s = sub.add_parser("structure", help="cube structures: build, axioms, completion, enumeration")
    ss = s.add_subparsers(dest="action", required=True)
    b = ss.add_parser("build", parents=[common])
    b.add_argument("--kind", required=True, choices=["D1", "Dk", "HZk"])
    b.add_argument("--group", required=True)
    b.add_argument("--k", type=int, default=1)
    b.add_argument("--center", default=None)
    b.add_argument("-o", "--out", default=None)
    ax = ss.add_parser("axioms", parents=[common])
    ax.add_argument("--spec", required=True)
    ax.add_argument("--dim-cap", type=int, default=3)
    ax.add_argument("--category", choices=["G", "N"], default="G")
    ax.add_argument("--nilspace-witness", action="store_true", help="also search for an N-morphism pullback that is not a cube")
    cp = ss.add_parser("complete", parents=[common])
    cp.add_argument("--spec", required=True)
    grp = cp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--corner", help="JSON file with the corner values")
    grp.add_argument("--values", help="comma-separated corner values")
    en = ss.add_parser("enumerate", parents=[common])
    en.add_argument("--spec", required=True)
    en.add_argument("--n", type=int, required=True)
    en.add_argument("--list", action="store_true")

    f = sub.add_parser("factor", help="characteristic factors, fibers and the fiber action")
    fs = f.add_subparsers(dest="action", required=True)
    tw = fs.add_parser("tower", parents=[common])
    tw.add_argument("--spec", required=True)
    tw.add_argument("--k-cap", type=int, default=2)
    tw.add_argument("--dim-cap", type=int, default=None)
    fb = fs.add_parser("fibers", parents=[common])
    fb.add_argument("--spec", required=True)
    fb.add_argument("--k", type=int, required=True)
    fb.add_argument("--dim-cap", type=int, default=None)
    ac = fs.add_parser("action", parents=[common])
    ac.add_argument("--spec", required=True)
    ac.add_argument("--k", type=int, default=2)
    ac.add_argument("--a", type=int, required=True)
    ac.add_argument("--x", type=int, required=True)
    ac.add_argument("--base-point", type=int, default=None)
    ac.add_argument("--dim-cap", type=int, default=None)

    w = sub.add_parser("gowers", help="Gowers norms and cube distributions")
    ws = w.add_subparsers(dest="action", required=True)
    ex = ws.add_parser("exact", parents=[common])
    mc = ws.add_parser("mc", parents=[common])
    for sp in (ex, mc):
        sp.add_argument("--group", required=True)
        sp.add_argument("--fn", required=True)
        sp.add_argument("--n", type=int, required=True)
    mc.add_argument("--samples", type=int, default=10000)
    mc.add_argument("--seed", type=int, default=None)
    dc = ws.add_parser("dist-compare", parents=[common])
    dc.add_argument("--group", required=True)
    dc.add_argument("--k", type=int, required=True)

    rp = sub.add_parser("replay", parents=[common], help="re-run the command recorded in a JSON report and compare")
    rp.add_argument("report_file")
    return p


HANDLERS = {"group": cmd_group, "structure": cmd_structure, "factor": cmd_factor, "gowers": cmd_gowers}


def _text(report: dict) -> str:
    lines = [f"{report['command']} {report['action']}: {report['status']}"]
    for key, val in report.get("result", {}).items():
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
            if len(val) > 200:
                val = val[:197] + "..."
        lines.append(f"  {key}: {val}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    return "\n".join(lines)


def run(argv: list[str]) -> tuple[int, dict]:
    """Execute a command; returns the exit code and the report."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return _replay(args.report_file)
    if getattr(args, "seed", "absent") is None:
        args.seed = fresh_seed()
        argv = list(argv) + ["--seed", str(args.seed)]
    if args.threads < 1 or not 0 < args.tolerance < 1:
        raise SystemExit(parser.error("--threads must be positive and --tolerance in (0, 1)"))
    inputs: dict = {}
    report = {
        "tool": "cubelab",
        "version": __version__,
        "command": args.command,
        "action": args.action,
        "argv": list(argv),
        "budget": {
            "operations": resolve_budget(args.budget),
            "enumeration": resolve_budget(args.budget, DEFAULT_ENUM_BUDGET),
        },
    }
    try:
        report["result"] = HANDLERS[args.command](args, inputs)
        report["status"] = "ok"
        code = EXIT_OK
    except VerificationFailure as e:
        report["result"] = e.result
        report["status"] = "verification-failed"
        code = EXIT_FAIL
    except (GroupLawError, ClassificationError) as e:
        report["status"] = "verification-failed"
        report["error"] = str(e)
        if isinstance(e, GroupLawError) and e.triple is not None:
            report["witness"] = list(e.triple)
        code = EXIT_FAIL
    except BudgetExceeded as e:
        report["status"] = "budget-exceeded"
        report["error"] = str(e) + "; consider a smaller instance" + (" or `gowers mc`" if args.command == "gowers" else "")
        code = EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        report["status"] = "usage-error"
        report["error"] = f"{type(e).__name__}: {e}"
        code = EXIT_USAGE
    report["inputs"] = inputs
    return code, report


def _replay(path) -> tuple[int, dict]:
    old = json.loads(Path(path).read_text())
    code, new = run(old["argv"])
    same = json.dumps(new, sort_keys=True) == json.dumps(old, sort_keys=True)
    return (EXIT_OK if same else EXIT_FAIL), {"tool": "cubelab", "version": __version__, "command": "replay", "action": "compare", "status": "ok" if same else "mismatch", "result": {"identical": same, "exit_code": code}}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        code, report = run(argv)
    except SystemExit as e:  # argparse usage errors and --help/--version
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    text = json.dumps(report, sort_keys=True, indent=1)
    out_fmt = "json"
    if "--output" in argv:
        out_fmt = argv[argv.index("--output") + 1]
    print(text if out_fmt == "json" else _text(report))
    rpath = argv[argv.index("--report") + 1] if "--report" in argv else None
    if rpath:
        Path(rpath).write_text(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
