"""From little-Frobenius approximate representations to exact strategies on a maximally entangled state."""
from __future__ import annotations

import logging
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
    game_value,
    maximally_entangled_state,
    require_synchronous,
    xor_bias,
)
from .xorsdp import VectorSolution

log = logging.getLogger(__name__)

MIDPOINT_TOL = 1e-12


@dataclass
class LiftResult:
    strategy: Strategy
    per_generator_distance: dict
    score: dict
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy.to_json(),
            "per_generator_distance": self.per_generator_distance,
            "score": self.score,
            "extras": self.extras,
        }


def _dim(images, gens):
    return sp.assignment_dim(images, gens)


def orthogonalize_pvm(ops, weights=None) -> tuple[list[np.ndarray], list[int]]:
    """Exact PVM from approximate projections via the spectrum of sum_a w_a sa(F_a).

    Each eigenvector goes to the answer whose weight is nearest its eigenvalue; an
    eigenvalue halfway between two weights goes to the lower answer.  Returns the
    projections and the indices of eigenvectors that hit such a tie.
    """
    k = len(ops)
    w = np.arange(k, dtype=float) if weights is None else np.asarray(weights, dtype=float)
    d = ops[0].shape[0]
    t = sum(wa * mc.nearest_self_adjoint(f) for wa, f in zip(w, ops))
    spec = mc.spectral_decomposition(t)
    choice, ties = [], []
    for idx, ev in enumerate(spec.eigenvalues):
        dist = np.abs(w - ev)
        best = int(np.argmin(dist))  # argmin returns the first (lowest) index on ties
        near = np.flatnonzero(dist <= dist[best] + MIDPOINT_TOL)
        if near.size > 1:
            ties.append(idx)
        choice.append(best)
    v = spec.eigenvectors
    out = []
    for a in range(k):
        cols = v[:, [idx for idx, c in enumerate(choice) if c == a]]
        out.append(cols @ mc.dagger(cols) if cols.shape[1] else np.zeros((d, d), dtype=complex))
    return out, ties


def lift_synchronous(images, game: NonlocalGame) -> LiftResult:
    require_synchronous(game)
    n_q, n_a = game.n_questions, game.n_answers
    gens = [sp.p_name(i, a) for i in range(n_q) for a in range(n_a)]
    d = _dim(images, gens)
    bob, flagged = [], {}
    for i in range(n_q):
        q, ties = orthogonalize_pvm([images[sp.p_name(i, a)] for a in range(n_a)])
        if ties:
            flagged[i] = ties
            log.warning("question %d: %d eigenvalues tied between answers", i, len(ties))
        bob.append(q)
    alice = [[np.conj(p) for p in q] for q in bob]
    strat = Strategy("pvm", alice, bob, maximally_entangled_state(d), canonical=True)
    val = game_value(game, strat)
    dist = {sp.p_name(i, a): mc.little_frobenius(images[sp.p_name(i, a)] - bob[i][a]) for i in range(n_q) for a in range(n_a)}
    loss = np.zeros((n_q, n_q))
    for i, a, j, b in game.losing_tuples():
        loss[i, j] += mc.little_frobenius(bob[i][a] @ bob[j][b]) ** 2
    return LiftResult(
        strat,
        dist,
        {"value": val.value, "gap_to_optimum": 1.0 - val.value},
        {"per_input": val.per_input.tolist(), "loss_identity": loss.tolist(), "ties": flagged},
    )


@dataclass
class SynchAssignment:
    assignment: dict
    report: sp.DefectReport


def synch_assignment_from_bcs(images, game: NonlocalGame) -> SynchAssignment:
    """p = (1 - z)/2 image-wise, with the defect recomputed against the synchronous algebra."""
    require_synchronous(game)
    expected = {sp.z_name(i, a) for i in range(game.n_questions) for a in range(game.n_answers)}
    if set(images) != expected:
        raise ValueError("assignment generators do not match the game's SynchBCS generators")
    p = sp.synch_from_synchbcs(images)
    return SynchAssignment(p, sp.defect(sp.synchronous_algebra(game), p, "f"))


def context_commuting_family(xs) -> tuple[np.ndarray, np.ndarray]:
    """Exactly commuting involutions near the given ones.

    Diagonalize sum_k 2^-k X_k (weights whose signed sums are all distinct), then
    sign-round the diagonal of every X_k in that eigenbasis.  Returns the eigenbasis
    (columns) and the sign pattern array of shape (dim, len(xs)).
    """
    h = sum((0.5**k) * mc.nearest_self_adjoint(x) for k, x in enumerate(xs))
    spec = mc.spectral_decomposition(h)
    v = spec.eigenvectors
    signs = np.stack(
        [mc.sign_round_diagonal(np.real(np.einsum("ij,ik,kj->j", np.conj(v), x, v))) for x in xs], axis=1
    )
    return v, signs


def lift_bcs(images, bcs: BinaryConstraintSystem) -> LiftResult:
    gens = [sp.x_name(j) for j in range(bcs.n)]
    d = _dim(images, gens)
    game = bcs_game(bcs)
    xs = [mc.round_to_involution(images[g]) for g in gens]
    eye = mc.identity(d)
    bob = [[(eye + x) / 2, (eye - x) / 2] for x in xs]
    alice, repairs, repaired_dims = [], {}, {}
    for i, con in enumerate(bcs.constraints):
        sats = con.satisfying()
        v, signs = context_commuting_family([xs[j] for j in con.scope])
        buckets = [[] for _ in sats]
        bad = 0
        for col, pattern in enumerate(signs):
            bits = tuple(int(s < 0) for s in pattern)
            if bits in sats:
                buckets[sats.index(bits)].append(col)
            else:
                buckets[0].append(col)
                bad += 1
        repaired_dims[i] = bad
        q = []
        for cols in buckets:
            b = v[:, cols]
            q.append(np.conj(b @ mc.dagger(b)))
        alice.append(q)
        for pos, j in enumerate(con.scope):
            z = (v * signs[:, pos]) @ mc.dagger(v)
            repairs[f"{i},{j}"] = mc.little_frobenius(z - xs[j])
    strat = Strategy("pvm", alice, bob, maximally_entangled_state(d), canonical=True)
    val = game_value(game, strat)
    dist = {g: mc.little_frobenius(images[g] - x) for g, x in zip(gens, xs)}
    return LiftResult(
        strat,
        dist,
        {"value": val.value, "gap_to_optimum": 1.0 - val.value},
        {"per_input": val.per_input.tolist(), "commuting_repair": repairs, "violating_dims": repaired_dims},
    )


def lift_xor(images, game: XorGame, sol: VectorSolution) -> LiftResult:
    gens = [sp.s_name(j) for j in range(game.n)]
    d = _dim(images, gens)
    g = game.cost
    c = np.asarray(sol.c, dtype=float)
    xs = [mc.round_to_involution(images[s]) for s in gens]
    alice, chain, row_dist = [], 0.0, []
    for i in range(game.m):
        if not np.any(g[i]):
            alice.append(mc.identity(d))
            row_dist.append(0.0)
            continue
        if c[i] <= 0:
            raise ValueError(f"row {i} has zero marginal bias and cannot be rescaled")
        ybar = sum(g[i, j] * xs[j] for j in range(game.n)) / c[i]
        zbar = mc.round_to_involution(ybar)
        dz = mc.little_frobenius(zbar - ybar)
        row_dist.append(dz)
        chain += abs(c[i]) * dz
        alice.append(np.conj(zbar))
    strat = Strategy("observable", alice, xs, maximally_entangled_state(d), canonical=True)
    beta = xor_bias(game, strat)
    gap = sol.bias - beta
    bound = chain + abs(sol.bias - float(np.sum(c)))
    if abs(gap) > bound + 1e-9:
        raise AssertionError(f"bias gap {gap:.3e} exceeds the chain bound {bound:.3e}")
    dist = {s: mc.little_frobenius(images[s] - x) for s, x in zip(gens, xs)}
    return LiftResult(
        strat,
        dist,
        {"bias": beta, "gap_to_optimum": gap},
        {"chain_bound": bound, "row_rounding_distance": row_dist},
    )


@dataclass
class StateDistance:
    lhs: float
    bound: float
    dimension_bound: float


def state_distance_bound(lam, p) -> StateDistance:
    """Distance ||lam - P/sqrt(r)||_F between the reduced states, with two closed-form bounds.

    ``bound`` is sqrt(2) (1 - sqrt(r/d))^(1/2).  ``dimension_bound`` is
    sqrt(2) (1 - sqrt(r)/d)^(1/2), which always holds for a top-r spectral projection
    because the top r eigenvalues of lam sum to at least r/d.
    """
    lm = lam.matrix if isinstance(lam, mc.DensityFactor) else mc.as_matrix(lam)
    p = mc.as_matrix(p)
    d = p.shape[0]
    r = int(round(np.trace(p).real))
    if r < 1:
        raise ValueError("projection is zero")
    lhs = mc.frobenius(lm - p / np.sqrt(r))
    return StateDistance(
        lhs,
        float(np.sqrt(2) * np.sqrt(max(0.0, 1 - np.sqrt(r / d)))),
        float(np.sqrt(2) * np.sqrt(max(0.0, 1 - np.sqrt(r) / d))),
    )
