"""Command-line front end.

Every report is JSON (or CSV for tabular profiles) and carries the schema
identifier, the anchor of the statement it exercises, and the run
configuration.  Exit codes: 0 pass, 1 violation or Out, 2 inconclusive,
3 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import boundary as bd
from . import checkers as ck
from .constants import ConstantBundle, ConstantsError, SublinearFn, psi
from .contraction import check_contracting, morse_profile, profile, recurrence, uniformity_profile
from .reports import CheckReport, SCHEMA_VERSION, check_schema, dumps, to_jsonable
from .space import (GroupSpace, LineSchema, PathSeg, RaySchema, SpaceError, build_space,
                    load_space_spec)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3

ANCHORS = dict(ck.ANCHORS, **{
    "profile": "contraction profile",
    "recurrence": "recurrence function",
    "morse": "Morse gauge",
    "constants": "contraction constants",
    "member-u": "fellow-travelling neighbourhoods",
    "member-v": "geodesic neighbourhoods",
    "separation": "Hausdorff separation of boundary points",
    "exp-flats": "flat excursions: fellow-travel versus stratum escape",
    "exp-clopen": "clopen edge sets",
    "uniformity": "uniform contraction of geodesics",
})


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def parse_target(space, text: str):
    """Targets: a ray (``(ca)^inf``, ``ray:...`` or JSON), ``geodesic:WORD``,
    ``path:WORD``, ``line:PERIOD`` or ``points:W1,W2,...``."""
    kind, sep, body = text.partition(":")
    if not sep or kind not in ("ray", "geodesic", "path", "line", "points"):
        kind, body = "ray", text
    if kind == "points":
        items = [s.strip() for s in body.split(",") if s.strip()]
        if isinstance(space, GroupSpace):
            return frozenset(space.element("" if w == "1" else w) for w in items)
        return frozenset(int(w) for w in items)
    if not isinstance(space, GroupSpace):
        raise InputError(f"target {text!r} needs a group space")
    if kind == "ray":
        return RaySchema.parse(body)
    if kind == "line":
        return LineSchema(body)
    path = PathSeg(tuple(space.path_from(space.o, space.parse_word(body))))
    if kind == "geodesic" and not path.is_geodesic(space):
        raise InputError(f"{body!r} does not spell a geodesic")
    return path


def parse_ray(text: str) -> RaySchema:
    return RaySchema.parse(text[4:] if text.startswith("ray:") else text)


def parse_grid(text: str) -> list:
    """``"1,0;2,2"`` -> [(1, 0), (2, 2)]."""
    out = []
    for cell in text.split(";"):
        if cell.strip():
            L, A = cell.split(",")
            out.append((Fraction(L), Fraction(A)))
    if not out:
        raise InputError("empty constant grid")
    return out


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal or rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", default="f2", help="built-in alias, JSON file or JSON string")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--horizon", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="morse-kit", description="Contracting geodesics and the Morse boundary.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    s = add("profile", "contraction profile of a target")
    s.add_argument("--set", dest="target", required=True)
    s.add_argument("--radius", type=int, default=6)
    s.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    s.add_argument("--count", type=int, default=20000)
    s.add_argument("--rho", help="also check the table against this bound")

    s = add("recurrence", "recurrence function estimate")
    s.add_argument("--set", dest="target", required=True)
    s.add_argument("--C", type=_fraction, default=Fraction(3))
    s.add_argument("--t", type=_fraction, default=Fraction(1, 3))

    s = add("morse", "Morse gauge estimate")
    s.add_argument("--set", dest="target", required=True)
    s.add_argument("--grid", default="1,0;2,2;3,3")

    s = add("constants", "contraction constants")
    s.add_argument("--rho", default="const:0")
    s.add_argument("--L", type=_fraction, default=Fraction(1))
    s.add_argument("--A", type=_fraction, default=Fraction(0))
    s.add_argument("--r", type=_fraction, help="also evaluate psi at r")

    for name in ("check-git", "check-qgit", "check-divagation", "check-keylemma", "wag-tail", "escape"):
        s = add(name, f"{name[6:] if name.startswith('check-') else name} checker")
        s.add_argument("--set", dest="target", default="c^inf")
        s.add_argument("--rho", help="contraction bound (default: fitted to the target)")
        s.add_argument("--count", type=int)
        if name == "check-qgit":
            s.add_argument("--sublinear", action="store_true", help="also tabulate the sublinear form")
        if name == "check-keylemma":
            s.add_argument("--hausdorff", action="store_true", help="run the Hausdorff bound instead")
        if name in ("wag-tail", "escape"):
            s.add_argument("--beta", help="explicit geodesic ray; otherwise seeded instances")
            s.add_argument("--L", type=_fraction, default=Fraction(1))
            s.add_argument("--A", type=_fraction, default=Fraction(0))
        if name == "wag-tail":
            s.add_argument("--gamma", help="explicit quasi-geodesic ray")
            s.add_argument("--T", type=int)
            s.add_argument("--S", type=int)

    for name in ("member-u", "member-v"):
        s = add(name, "boundary neighbourhood membership")
        s.add_argument("--zeta", required=True)
        s.add_argument("--eta", required=True)
        s.add_argument("--r", type=int, required=True)
        if name == "member-v":
            s.add_argument("--prime", action="store_true", help="existential variant")

    s = add("separation", "separating radius of two boundary points")
    s.add_argument("--zeta", required=True)
    s.add_argument("--eta", required=True)

    s = add("exp-flats", "flat excursion experiment")
    s.add_argument("--n-max", type=int, default=6)
    s.add_argument("--r", type=int, default=9)

    s = add("exp-clopen", "clopen edge-set experiment")
    s.add_argument("--n-max", type=int, default=6)

    s = add("uniformity", "uniform contraction probe")
    s.add_argument("--radius", type=int, default=6)
    s.add_argument("--geodesic-budget", type=int, default=256)

    s = sub.add_parser("replay", help="rerun a report and compare it byte for byte")
    s.add_argument("report")
    s.add_argument("--out")
    return p


# ---------------------------------------------------------------------------
# commands


def _rho(args, space, Z, horizon: int) -> SublinearFn:
    if getattr(args, "rho", None):
        return SublinearFn.parse(args.rho)
    if isinstance(Z, RaySchema):
        return bd.rho_zeta(space, Z, max(horizon, 8))
    raise InputError("--rho is required for this target")


def _ray_target(args, space) -> RaySchema:
    Z = parse_target(space, args.target)
    if not isinstance(Z, RaySchema):
        raise InputError("this checker needs a ray target")
    return Z


def _envelope(kind: str, body, params: dict | None = None) -> dict:
    return {"schema": SCHEMA_VERSION, "report": kind, "anchor": ANCHORS[kind],
            "params": params or {}, "result": body}


def cmd_profile(args, space):
    Z = parse_target(space, args.target)
    prof = profile(space, Z, args.radius, args.mode, args.seed, args.count)
    code = EXIT_PASS
    body = prof.to_dict()
    if args.rho:
        rep = check_contracting(prof, SublinearFn.parse(args.rho))
        body["check"] = rep.to_dict()
        code = rep.exit_code
    return _envelope("profile", body), code, prof.to_csv()


def cmd_recurrence(args, space):
    Z = parse_target(space, args.target)
    est = recurrence(space, Z, args.C, args.t, args.budget or 500, args.seed, args.horizon or 12)
    return _envelope("recurrence", est.to_dict(space), {"C": args.C, "t": args.t}), EXIT_PASS, None


def cmd_morse(args, space):
    Z = parse_target(space, args.target)
    rows = morse_profile(space, Z, parse_grid(args.grid), args.budget or 500, args.seed, args.horizon or 12)
    return _envelope("morse", [r.to_dict() for r in rows], {"grid": args.grid}), EXIT_PASS, None


def cmd_constants(args, space):
    rho = SublinearFn.parse(args.rho)
    data = ConstantBundle.compute(rho, args.L, args.A).to_dict()
    if args.r is not None:
        data["psi"] = psi(rho, args.r)
    out = {"schema": SCHEMA_VERSION, "report": "constants", "anchor": ANCHORS["constants"]}
    out.update(data)
    return out, EXIT_PASS, None


def _check(args, space, kind):
    Z = _ray_target(args, space)
    hz = args.horizon
    if kind == "git":
        rho = _rho(args, space, Z, hz or 6)
        try:
            return ck.check_git(space, Z, rho, hz or 10, args.budget or 2000, args.seed)
        except ck.CheckerError as exc:
            rep = ck._report("git", space, Z, rho, horizon=hz or 6)
            rep.inconclusive = True
            rep.extra["precondition"] = str(exc)
            return rep
    rho = _rho(args, space, Z, hz or 30)
    if kind == "qgit":
        rep = ck.run_qgit(space, Z, rho, args.count or 1000, args.seed, hz or 12)
        if args.sublinear:
            rep.extra["sublinear"] = ck.estimate_qgit2(space, Z, rho, budget=args.budget or 2000, seed=args.seed)
        return rep
    if kind == "divagation":
        return ck.run_divagation(space, Z, rho, args.count or 1000, args.seed, hz or 30)
    if kind == "keylemma":
        run = ck.run_hausdorff if args.hausdorff else ck.run_keylemma
        return run(space, Z, rho, args.count or 1000, args.seed, hz or 30)
    if kind == "escape":
        if args.beta:
            rep = ck._report("escape", space, Z, rho, horizon=hz or 30)
            sur = ck.build_escape_qg(space, Z, parse_ray(args.beta), rho, args.L, args.A, hz or 30, 0, rep)
            rep.extra["path"] = ck._path_label(space, sur.path)
            return rep
        return ck.run_escape(space, Z, rho, args.count or 200, args.seed, hz or 30)
    if kind == "wag":
        if args.gamma or args.beta:
            if not (args.gamma and args.beta and args.T is not None and args.S is not None):
                raise InputError("explicit tail wagging needs --gamma, --beta, --T and --S")
            hz = hz or args.S + 40
            rep = ck._report("wag", space, Z, rho, horizon=hz)
            sur = ck.wag_tail(space, Z, parse_ray(args.gamma), parse_ray(args.beta), rho,
                              args.T, args.S, args.L, args.A, hz, 0, rep)
            rep.extra["path"] = ck._path_label(space, sur.path)
            return rep
        return ck.run_wag(space, Z, rho, args.count or 200, args.seed)
    raise AssertionError(kind)


def cmd_check(kind):
    def run(args, space):
        rep = _check(args, space, kind)
        return rep.to_dict(), rep.exit_code, None
    return run


def _point(space, text, horizon):
    return bd.BoundaryPoint.build(space, parse_ray(text), horizon)


VERDICT_EXIT = {bd.OUT: EXIT_FAIL, bd.NO_COUNTEREXAMPLE: EXIT_PASS, bd.IN_CERTIFIED: EXIT_PASS,
                bd.INCONCLUSIVE: EXIT_INCONCLUSIVE}


def cmd_member(args, space):
    hz = args.horizon or 40
    zeta, eta = _point(space, args.zeta, hz), _point(space, args.eta, hz)
    if args.command == "member-u":
        v = bd.membership_U(space, zeta, args.r, eta, hz, args.budget or 100_000)
    elif args.prime:
        v = bd.membership_V_prime(space, zeta, args.r, eta, hz, args.budget or 256)
    else:
        v = bd.membership_V(space, zeta, args.r, eta, hz, args.budget or 256)
    body = {"zeta": zeta.to_dict(), "eta": eta.to_dict(), "r": args.r, "verdict": v.to_dict(space)}
    return _envelope(args.command, body), VERDICT_EXIT[v.kind], None


def cmd_separation(args, space):
    hz = args.horizon or 40
    zeta, eta = _point(space, args.zeta, hz), _point(space, args.eta, hz)
    sep = bd.separation(space, zeta, eta, hz, args.budget or 2000)
    body = {"zeta": zeta.to_dict(), "eta": eta.to_dict(), **sep.to_dict()}
    code = EXIT_PASS if sep.R is not None and sep.confirmed else EXIT_INCONCLUSIVE
    return _envelope("separation", body), code, None


def _rows_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_flats(args, space):
    res = bd.experiment_flat_excursions(space, args.n_max, args.r, args.horizon or 40, args.budget or 100_000)
    code = EXIT_PASS if res["fq_converges"] and res["dl_escapes"] else EXIT_FAIL
    return _envelope("exp-flats", res), code, _rows_csv(res["rows"])


def cmd_clopen(args, space):
    res = bd.experiment_clopen(space, args.n_max, args.horizon or 20, args.budget or 4096)
    code = EXIT_PASS if res["clopen_obstruction"] else EXIT_FAIL
    return _envelope("exp-clopen", res), code, _rows_csv(res["rows"])


def cmd_uniformity(args, space):
    prof = uniformity_profile(space, args.radius, args.geodesic_budget)
    return _envelope("uniformity", prof.to_dict()), EXIT_PASS, prof.to_csv()


COMMANDS = {
    "profile": cmd_profile,
    "recurrence": cmd_recurrence,
    "morse": cmd_morse,
    "constants": cmd_constants,
    "check-git": cmd_check("git"),
    "check-qgit": cmd_check("qgit"),
    "check-divagation": cmd_check("divagation"),
    "check-keylemma": cmd_check("keylemma"),
    "wag-tail": cmd_check("wag"),
    "escape": cmd_check("escape"),
    "member-u": cmd_member,
    "member-v": cmd_member,
    "separation": cmd_separation,
    "exp-flats": cmd_flats,
    "exp-clopen": cmd_clopen,
    "uniformity": cmd_uniformity,
}


# ---------------------------------------------------------------------------
# driver


def _run_config(args, argv) -> dict:
    return {"command": args.command, "argv": _strip_out(list(argv)), "space": args.space, "seed": args.seed,
            "horizon": args.horizon, "budget": args.budget}


def execute(argv) -> tuple[str, int]:
    """Run one command; returns (output text, exit code).  Raises on input
    errors."""
    args = build_parser().parse_args(argv)
    if args.command == "replay":
        return replay(args.report)
    space = build_space(load_space_spec(args.space))
    data, code, table = COMMANDS[args.command](args, space)
    if args.format == "csv":
        if table is None:
            raise InputError(f"{args.command} has no tabular output; use --format json")
        return table, code
    data = to_jsonable(data)
    data["run"] = to_jsonable(_run_config(args, argv))
    return dumps(data), code


def replay(path: str) -> tuple[str, int]:
    """Rerun the command recorded in a JSON report and check the output is
    byte-identical."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not a JSON report: {exc}") from exc
    try:
        check_schema(data)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    argv = [a for a in data.get("run", {}).get("argv", []) if a]
    if not argv:
        raise InputError("report has no recorded run configuration")
    out, code = execute(_strip_out(argv))
    same = out == text
    body = {"schema": SCHEMA_VERSION, "report": "replay", "anchor": "replay", "source": path,
            "identical": same, "exit_code": code}
    return dumps(body), code if same else EXIT_FAIL


def _strip_out(argv: list) -> list:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        text, code = execute(argv)
    except (InputError, SpaceError, ConstantsError, ValueError, OSError, KeyError) as exc:
        print(f"morse-kit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
