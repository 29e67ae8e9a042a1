"""Command-line entry point: ``gamealg <subcommand> ...``.

Exit codes: 0 success, 1 validation error (bad input files or arguments),
2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import matcore as mc
from . import starpoly as sp
from .games import (
    BinaryConstraintSystem,
    NonlocalGame,
    Strategy,
    XorGame,
    bcs_game,
    game_from_json,
    game_value,
    xor_bias,
)
from .instances import NAMES, instance
from .lifting import lift_bcs, lift_synchronous, lift_xor, synch_assignment_from_bcs
from .rounding import round_representation
from .strategy2rep import RhoRepExtraction, extract_bcs, extract_synchronous, extract_xor
from .sweep import SweepConfig, run_sweep
from .xorsdp import VectorSolution, optimal_bias, tsirelson_strategy

SEED_ENV = "GAMEALG_SEED"


class ValidationError(Exception):
    pass


def _read_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ValidationError(f"{path}: {what} file not found") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse(path: str, what: str, fn):
    obj = _read_json(path, what)
    try:
        return fn(obj)
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"{path}: invalid {what}: {exc}") from exc


def load_game(ref: str):
    if ref in NAMES and not Path(ref).exists():
        return instance(ref).game
    return _parse(ref, "game", game_from_json)


def load_assignment(path: str) -> dict:
    def conv(obj):
        if "rounded" in obj:  # a rounding result
            return sp.assignment_from_json(obj["rounded"])
        if "assignment" in obj:  # an extraction
            return sp.assignment_from_json(obj["assignment"])
        return sp.assignment_from_json(obj)

    return _parse(path, "assignment", conv)


def load_solution(args, game: XorGame) -> VectorSolution:
    if args.solution:
        return _parse(args.solution, "vector solution", VectorSolution.from_json)
    return optimal_bias(game, seed=args.seed)


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _presentation_for(game, images: dict, c=None):
    if isinstance(game, BinaryConstraintSystem):
        return sp.bcs_algebra(game)
    if isinstance(game, XorGame):
        return sp.xor_solution_algebra(game, c)
    names = set(images)
    if names and all(n.startswith("z[") for n in names):
        return sp.synchbcs_algebra(game)
    return sp.synchronous_algebra(game)


# --- subcommands --------------------------------------------------------------------------


def cmd_instance(args):
    inst = instance(args.name)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.name}.game.json").write_text(json.dumps(inst.game.to_json(), indent=2))
    (out / f"{args.name}.assignment.json").write_text(json.dumps(sp.assignment_to_json(inst.assignment)))
    (out / f"{args.name}.strategy.json").write_text(json.dumps(inst.strategy.to_json()))
    if "solution" in inst.reference:
        (out / f"{args.name}.solution.json").write_text(json.dumps(inst.reference["solution"].to_json()))
    _emit({"written": sorted(p.name for p in out.glob(f"{args.name}.*.json"))}, None)


def _strategy(args) -> Strategy:
    if not args.strategy:
        raise ValidationError("--strategy is required")
    return _parse(args.strategy, "strategy", Strategy.from_json)


def cmd_value(args):
    game = load_game(args.game)
    s = _strategy(args)
    if isinstance(game, BinaryConstraintSystem):
        game = bcs_game(game)
    if not isinstance(game, NonlocalGame):
        raise ValidationError(f"{args.game}: value needs a predicate, synchronous or bcs game")
    try:
        v = game_value(game, s)
    except ValueError as exc:
        raise ValidationError(f"{args.strategy}: {exc}") from exc
    _emit({"value": v.value, "per_input": v.per_input}, args.out)


def cmd_bias(args):
    game = load_game(args.game)
    if not isinstance(game, XorGame):
        raise ValidationError(f"{args.game}: bias needs an xor game")
    s = _strategy(args)
    try:
        b = xor_bias(game, s)
    except ValueError as exc:
        raise ValidationError(f"{args.strategy}: {exc}") from exc
    _emit({"bias": b}, args.out)


def cmd_defect(args):
    game = load_game(args.game)
    if not args.assignment:
        raise ValidationError("--assignment is required")
    images = load_assignment(args.assignment)
    c = load_solution(args, game).c if isinstance(game, XorGame) else None
    pres = _presentation_for(game, images, c)
    lam = None
    if args.norm == "rho":
        if not args.density:
            raise ValidationError("--norm rho needs --density")
        lam = _parse(args.density, "density factor", lambda o: mc.density_factor(mc.matrix_from_json(o)))
    try:
        rep = sp.defect(pres, images, args.norm, lam)
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"{args.assignment}: {exc}") from exc
    _emit(rep.to_json(), args.out)


def cmd_extract(args):
    game = load_game(args.game)
    s = _strategy(args)
    try:
        if isinstance(game, BinaryConstraintSystem):
            ex = extract_bcs(game, s)
        elif isinstance(game, XorGame):
            ex = extract_xor(game, s, load_solution(args, game).c)
        else:
            ex = extract_synchronous(game, s)
    except ValueError as exc:
        raise ValidationError(f"{args.strategy}: {exc}") from exc
    _emit(ex.to_json(), args.out)


def cmd_round(args):
    path = args.extraction or args.assignment
    if not path:
        raise ValidationError("--extraction is required")
    ex = _parse(path, "extraction", RhoRepExtraction.from_json)
    images, pres = ex.assignment, ex.presentation
    if pres.name == "synchronous":
        # projections are rounded through their involution picture
        images = sp.synchbcs_from_synch(images)
        if not args.game:
            raise ValidationError("--game is required to round a synchronous extraction")
        pres = sp.synchbcs_algebra(load_game(args.game))
    rr = round_representation(images, ex.lam, pres, args.tol)
    _emit(rr.to_json(), args.out)
    if args.csv:
        rows = ["alpha,width,rank,functional,skipped"]
        rows += [f"{b.alpha!r},{b.width!r},{b.rank},{b.functional!r},{int(b.skipped)}" for b in rr.breakpoints]
        Path(args.csv).write_text("\n".join(rows) + "\n")


def cmd_lift(args):
    game = load_game(args.game)
    if not args.assignment:
        raise ValidationError("--assignment is required")
    images = load_assignment(args.assignment)
    try:
        if isinstance(game, BinaryConstraintSystem):
            res = lift_bcs(images, game)
        elif isinstance(game, XorGame):
            res = lift_xor(images, game, load_solution(args, game))
        else:
            if images and all(k.startswith("z[") for k in images):
                images = synch_assignment_from_bcs(images, game).assignment
            res = lift_synchronous(images, game)
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"{args.assignment}: {exc}") from exc
    _emit(res.to_json(), args.out)


def cmd_xor_solve(args):
    game = load_game(args.game)
    if not isinstance(game, XorGame):
        raise ValidationError(f"{args.game}: xor-solve needs an xor game")
    sol = optimal_bias(game, restarts=args.restarts, seed=args.seed)
    _emit(sol.to_json(), args.out)
    if args.strategy_out:
        Path(args.strategy_out).write_text(json.dumps(tsirelson_strategy(sol).to_json()))


def cmd_sweep(args):
    if not args.config:
        raise ValidationError("--config is required")
    cfg_obj = _read_json(args.config, "sweep config")
    if args.out:
        cfg_obj["output"] = args.out
    if args.intermediates:
        cfg_obj["intermediates"] = args.intermediates
    cfg_obj.setdefault("seed", args.seed)
    try:
        cfg = SweepConfig.from_json(cfg_obj)
    except ValueError as exc:
        raise ValidationError(f"{args.config}: {exc}") from exc
    try:
        res = run_sweep(cfg)
    except KeyError as exc:
        raise ValidationError(f"{args.config}: {exc}") from exc
    if cfg.output:
        _emit(res.summary(), None)
    else:
        sys.stdout.write(res.csv_text())
        sys.stderr.write(json.dumps(res.summary(), sort_keys=True) + "\n")


def numeric_iso_residual(game: NonlocalGame, rng: np.random.Generator, dim: int = 3) -> float:
    """Round-trip both image-wise maps on a random assignment with dyadic entries."""
    def dyadic():
        return (rng.integers(-64, 65, (dim, dim)) + 1j * rng.integers(-64, 65, (dim, dim))) / 32

    z = {sp.z_name(i, a): dyadic() for i in range(game.n_questions) for a in range(game.n_answers)}
    p = {sp.p_name(i, a): dyadic() for i in range(game.n_questions) for a in range(game.n_answers)}
    back_z = sp.synchbcs_from_synch(sp.synch_from_synchbcs(z))
    back_p = sp.synch_from_synchbcs(sp.synchbcs_from_synch(p))
    res = max(np.max(np.abs(back_z[k] - z[k])) for k in z)
    return float(max(res, max(np.max(np.abs(back_p[k] - p[k])) for k in p)))


def cmd_check_iso(args):
    game = load_game(args.game)
    if not isinstance(game, NonlocalGame) or not game.is_synchronous():
        raise ValidationError(f"{args.game}: check-iso needs a synchronous game")
    sym = sp.symbolic_iso_residual(game)
    num = numeric_iso_residual(game, np.random.default_rng(args.seed))
    _emit({"symbolic_residual": sym, "numeric_residual": num}, args.out)
    if sym or num:
        raise np.linalg.LinAlgError("isomorphism round trip is not the identity")


# --- parser -------------------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--game", help="game JSON file or library name (" + ", ".join(NAMES) + ")")
    common.add_argument("--strategy")
    common.add_argument("--assignment")
    common.add_argument("--solution", help="vector solution JSON for xor games")
    common.add_argument("--norm", choices=sp.NORM_KINDS, default="f")
    common.add_argument("--density", help="density factor matrix JSON for --norm rho")
    common.add_argument("--seed", type=int, default=_default_seed())
    common.add_argument("--out")

    p = argparse.ArgumentParser(prog="gamealg", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("value", parents=[common]).set_defaults(fn=cmd_value)
    sub.add_parser("bias", parents=[common]).set_defaults(fn=cmd_bias)
    sub.add_parser("defect", parents=[common]).set_defaults(fn=cmd_defect)
    sub.add_parser("extract", parents=[common]).set_defaults(fn=cmd_extract)
    r = sub.add_parser("round", parents=[common])
    r.add_argument("--extraction")
    r.add_argument("--tol", type=float, default=1e-6)
    r.add_argument("--csv")
    r.set_defaults(fn=cmd_round)
    sub.add_parser("lift", parents=[common]).set_defaults(fn=cmd_lift)
    x = sub.add_parser("xor-solve", parents=[common])
    x.add_argument("--restarts", type=int, default=32)
    x.add_argument("--strategy-out")
    x.set_defaults(fn=cmd_xor_solve)
    s = sub.add_parser("sweep", parents=[common])
    s.add_argument("--config")
    s.add_argument("--intermediates")
    s.set_defaults(fn=cmd_sweep)
    sub.add_parser("check-iso", parents=[common]).set_defaults(fn=cmd_check_iso)
    i = sub.add_parser("instance", parents=[common])
    i.add_argument("name", choices=NAMES)
    i.set_defaults(fn=cmd_instance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, AssertionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
