"""From strategies to approximate representations in the state-induced seminorm."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from . import starpoly as sp
from .games import (
    BinaryConstraintSystem,
    NonlocalGame,
    Strategy,
    XorGame,
    bcs_game,
    canonicalize,
    expectation,
    require_synchronous,
)


@dataclass
class RhoRepExtraction:
    assignment: dict
    lam: mc.DensityFactor
    report: sp.DefectReport
    atp_defect: float
    presentation: sp.AlgebraPresentation
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "presentation": self.presentation.to_json(),
            "assignment": sp.assignment_to_json(self.assignment),
            "lam": mc.matrix_to_json(self.lam.matrix),
            "report": self.report.to_json(),
            "atp_defect": self.atp_defect,
            "extras": self.extras,
        }

    @classmethod
    def from_json(cls, obj: dict) -> RhoRepExtraction:
        try:
            return cls(
                sp.assignment_from_json(obj["assignment"]),
                mc.density_factor(mc.matrix_from_json(obj["lam"])),
                sp.DefectReport.from_json(obj["report"]),
                float(obj["atp_defect"]),
                sp.AlgebraPresentation.from_json(obj["presentation"]),
                dict(obj.get("extras", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed extraction: {exc}") from exc


def atp_defect(images, lam) -> float:
    """max over generators of ||phi(s) lam - lam phi(s)||_F."""
    lm = lam.matrix if isinstance(lam, mc.DensityFactor) else np.asarray(lam)
    return max((mc.frobenius(x @ lm - lm @ x) for x in images.values()), default=0.0)


def _canonical(s: Strategy) -> Strategy:
    return s if s.canonical else canonicalize(s).strategy


def _finish(pres, images, lam, extras) -> RhoRepExtraction:
    rep = sp.defect(pres, images, "rho", lam)
    atp = atp_defect(images, lam)
    rep.atp_defect = atp
    return RhoRepExtraction(images, lam, rep, atp, pres, extras)


def alice_bob_residual(e, f, lam) -> float:
    """||E lam - lam conj(F)||_F; for canonical states this is ||(E (x) 1 - 1 (x) F) psi||."""
    lm = lam.matrix if isinstance(lam, mc.DensityFactor) else lam
    return mc.frobenius(e @ lm - lm @ np.conj(f))


def extract_synchronous(game: NonlocalGame, s: Strategy) -> RhoRepExtraction:
    """Bob's projections as an assignment of the synchronous algebra."""
    require_synchronous(game)
    if s.kind != "pvm":
        raise ValueError("synchronous extraction needs a PVM strategy")
    if len(s.bob) != game.n_questions or any(len(q) != game.n_answers for q in s.bob):
        raise ValueError("strategy questions/answers do not match the game")
    if len(s.alice) != game.n_questions or any(len(q) != game.n_answers for q in s.alice):
        raise ValueError("strategy questions/answers do not match the game")
    s = _canonical(s)
    lam = s.lam()
    images = {sp.p_name(i, a): s.bob[i][a] for i in range(game.n_questions) for a in range(game.n_answers)}
    consistency = {
        sp.p_name(i, a): alice_bob_residual(s.alice[i][a], s.bob[i][a], lam)
        for i in range(game.n_questions)
        for a in range(game.n_answers)
    }
    extras = {"consistency": consistency, "max_consistency": max(consistency.values())}
    return _finish(sp.synchronous_algebra(game), images, lam, extras)


def consistency_expansion(s: Strategy, i: int, a: int) -> tuple[float, float]:
    """Both sides of ||E_a lam - lam conj(F_a)||^2 = sum_{b!=a} <E_a F_b> + sum_{a'!=a} <E_a' F_a>."""
    if not s.canonical:
        raise ValueError("strategy must be canonical")
    lam = s.lam()
    m = s.coefficient_matrix()
    lhs = alice_bob_residual(s.alice[i][a], s.bob[i][a], lam) ** 2
    k = len(s.bob[i])
    rhs = sum(expectation(s.alice[i][a], s.bob[i][b], m).real for b in range(k) if b != a)
    rhs += sum(expectation(s.alice[i][a2], s.bob[i][a], m).real for a2 in range(k) if a2 != a)
    return lhs, rhs


def bob_observables(s: Strategy) -> list[np.ndarray]:
    """Bob's +-1 observables; two-outcome PVMs {Q0, Q1} become Q0 - Q1."""
    if s.kind == "observable":
        return list(s.bob)
    out = []
    for j, q in enumerate(s.bob):
        if len(q) != 2:
            raise ValueError(f"bob[{j}] has {len(q)} outcomes, expected 2")
        out.append(q[0] - q[1])
    return out


def alice_context_observables(bcs: BinaryConstraintSystem, s: Strategy) -> dict:
    """Z_ij = sum_a (-1)^{a_j} P_a^i for each constraint i and variable j in its scope."""
    out = {}
    for i, con in enumerate(bcs.constraints):
        sats = con.satisfying()
        q = s.alice[i]
        if len(q) != len(sats):
            raise ValueError(f"alice[{i}] has {len(q)} outcomes, constraint has {len(sats)} satisfying assignments")
        for pos, j in enumerate(con.scope):
            out[(i, j)] = sum((1 - 2 * bits[pos]) * p for bits, p in zip(sats, q))
    return out


def extract_bcs(bcs: BinaryConstraintSystem, s: Strategy) -> RhoRepExtraction:
    """Bob's variable observables as an assignment of the BCS algebra."""
    if len(s.bob) != bcs.n:
        raise ValueError(f"strategy has {len(s.bob)} Bob operators, system has {bcs.n} variables")
    s = _canonical(s)
    lam = s.lam()
    xs = bob_observables(s)
    images = {sp.x_name(j): x for j, x in enumerate(xs)}
    extras = {}
    if s.kind == "pvm":
        if len(s.alice) != bcs.m:
            raise ValueError(f"strategy has {len(s.alice)} Alice questions, system has {bcs.m} constraints")
        res = {
            f"{i},{j}": mc.frobenius(xs[j] @ lam.matrix - lam.matrix @ np.conj(z))
            for (i, j), z in alice_context_observables(bcs, s).items()
        }
        extras = {"consistency": res, "max_consistency": max(res.values(), default=0.0)}
    return _finish(sp.bcs_algebra(bcs), images, lam, extras)


def extract_xor(game: XorGame, s: Strategy, c) -> RhoRepExtraction:
    """Bob's observables as an assignment of the solution algebra for row biases ``c``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (game.m,):
        raise ValueError(f"expected {game.m} row biases, got {c.shape}")
    if s.kind != "observable":
        raise ValueError("XOR extraction needs an observable strategy")
    if len(s.bob) != game.n or len(s.alice) != game.m:
        raise ValueError("strategy shape does not match the game")
    s = _canonical(s)
    lam = s.lam()
    lm = lam.matrix
    g = game.cost
    images = {sp.s_name(j): x for j, x in enumerate(s.bob)}
    rows = []
    for i in range(game.m):
        comb = sum(g[i, j] * s.bob[j] for j in range(game.n))
        rows.append(mc.frobenius(comb @ lm - c[i] * lm @ np.conj(s.alice[i])))
    extras = {"row_residuals": rows, "max_row_residual": max(rows, default=0.0)}
    return _finish(sp.xor_solution_algebra(game, c), images, lam, extras)
