"""Library of small games together with exact representations and perfect/optimal strategies."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from . import starpoly as sp
from .games import (
    BinaryConstraintSystem,
    Constraint,
    Strategy,
    graph_coloring_game,
    chsh_game,
    maximally_entangled_state,
    parity_table,
)
from .xorsdp import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, optimal_bias, tsirelson_strategy

EXACT_TOL = 1e-12
ANCILLA_SPECTRUM = (0.6, 0.25, 0.1, 0.05)
TRIANGLE_SPECTRUM = (0.35, 0.25, 0.15, 0.12, 0.08, 0.05)


@dataclass
class Instance:
    name: str
    kind: str  # "bcs" | "synchronous" | "xor"
    game: object
    presentation: sp.AlgebraPresentation
    assignment: dict
    strategy: Strategy
    reference: dict = field(default_factory=dict)


def magic_square() -> BinaryConstraintSystem:
    """Variables 0..8 row-major; rows multiply to +1, columns to -1."""
    rows = [((3 * r, 3 * r + 1, 3 * r + 2), parity_table(3, odd=False)) for r in range(3)]
    cols = [((c, c + 3, c + 6), parity_table(3, odd=True)) for c in range(3)]
    return BinaryConstraintSystem(9, tuple(Constraint(s, t) for s, t in rows + cols), "magic-square")


def magic_square_paulis() -> list[np.ndarray]:
    k = np.kron
    return [
        k(PAULI_X, PAULI_I), k(PAULI_I, PAULI_X), k(PAULI_X, PAULI_X),
        k(PAULI_I, PAULI_Z), k(PAULI_Z, PAULI_I), k(PAULI_Z, PAULI_Z),
        -k(PAULI_X, PAULI_Z), -k(PAULI_Z, PAULI_X), k(PAULI_Y, PAULI_Y),
    ]


def bcs_strategy_from_observables(bcs: BinaryConstraintSystem, xs, state=None) -> Strategy:
    """Strategy for the BCS game from exactly commuting-per-context involutions.

    Bob measures X_j; Alice measures, for constraint i, the joint eigenprojections of
    its scope variables (conjugated), one projection per satisfying assignment.
    """
    from .lifting import context_commuting_family

    d = xs[0].shape[0]
    eye = mc.identity(d)
    bob = [[(eye + x) / 2, (eye - x) / 2] for x in xs]
    alice = []
    for i, con in enumerate(bcs.constraints):
        sats = con.satisfying()
        v, signs = context_commuting_family([xs[j] for j in con.scope])
        buckets = [[] for _ in sats]
        for col, pattern in enumerate(signs):
            bits = tuple(int(s < 0) for s in pattern)
            if bits not in sats:
                raise ValueError(f"operators violate constraint {i}")
            buckets[sats.index(bits)].append(col)
        alice.append([np.conj(v[:, c] @ mc.dagger(v[:, c])) for c in buckets])
    if state is None:
        state = maximally_entangled_state(d)
    return Strategy("pvm", alice, bob, state, canonical=True)


TRIANGLE_COLORING = (0, 1, 2)


def triangle_game():
    return graph_coloring_game(3, [(0, 1), (1, 2), (0, 2)], 3, name="triangle-3col")


def coloring_strategy(colorings, state_coeffs) -> Strategy:
    """Direct sum of deterministic colorings; block k answers colorings[k] on both sides."""
    colorings = [tuple(c) for c in colorings]
    d = len(colorings)
    n_q = len(colorings[0])
    n_a = max(max(c) for c in colorings) + 1
    ops = [[np.diag([1.0 if c[i] == a else 0.0 for c in colorings]).astype(complex) for a in range(n_a)] for i in range(n_q)]
    state = np.diag(np.asarray(state_coeffs, dtype=complex)).ravel()
    return Strategy("pvm", ops, [list(q) for q in ops], state, canonical=True)


def proper_colorings(n_colors=3):
    import itertools

    return [c for c in itertools.permutations(range(n_colors), 3)]


def _verify(inst: Instance) -> Instance:
    rep = sp.defect(inst.presentation, inst.assignment, "f")
    if rep.max_defect > EXACT_TOL:
        raise AssertionError(f"instance {inst.name}: reference defect {rep.max_defect:.3e}")
    return inst


def instance(name: str) -> Instance:
    if name == "magic-square":
        bcs = magic_square()
        xs = magic_square_paulis()
        images = {sp.x_name(j): x for j, x in enumerate(xs)}
        return _verify(Instance(name, "bcs", bcs, sp.bcs_algebra(bcs), images, bcs_strategy_from_observables(bcs, xs), {"value": 1.0}))
    if name == "triangle-3col":
        g = triangle_game()
        col = TRIANGLE_COLORING
        images = {sp.z_name(i, a): np.array([[-1.0 if col[i] == a else 1.0]], dtype=complex) for i in range(3) for a in range(3)}
        strat = coloring_strategy([col], [1.0])
        return _verify(Instance(name, "synchronous", g, sp.synchbcs_algebra(g), images, strat, {"value": 1.0}))
    if name == "chsh":
        g = chsh_game()
        sol = optimal_bias(g)
        strat = tsirelson_strategy(sol)
        images = {sp.s_name(j): x for j, x in enumerate(strat.bob)}
        return _verify(Instance(name, "xor", g, sp.xor_solution_algebra(g, sol.c), images, strat, {"bias": 1 / np.sqrt(2), "solution": sol}))
    raise KeyError(f"unknown instance {name!r}; known: {', '.join(NAMES)}")


NAMES = ("magic-square", "triangle-3col", "chsh")


def ancilla_factor(spectrum=ANCILLA_SPECTRUM) -> np.ndarray:
    return np.diag(np.sqrt(np.asarray(spectrum, dtype=float)))


def sweep_base(name: str) -> tuple[Instance, Strategy]:
    """Exact strategy with a non-maximally entangled state, used as the unperturbed sweep point.

    magic-square and chsh: the reference operators tensored with the identity on a
    4-dimensional ancilla entangled with Schmidt spectrum ANCILLA_SPECTRUM (dim 16).
    triangle-3col: the direct sum of the six proper colorings with skewed weights (dim 6).
    """
    inst = instance(name)
    if name == "triangle-3col":
        return inst, coloring_strategy(proper_colorings(), np.sqrt(TRIANGLE_SPECTRUM))
    s = inst.strategy
    da = s.dims[0]
    anc = ancilla_factor()
    eye_a = mc.identity(anc.shape[0])
    m = np.kron(s.coefficient_matrix(), anc)
    if s.kind == "pvm":
        alice = [[np.kron(p, eye_a) for p in q] for q in s.alice]
        bob = [[np.kron(p, eye_a) for p in q] for q in s.bob]
    else:
        alice = [np.kron(x, eye_a) for x in s.alice]
        bob = [np.kron(x, eye_a) for x in s.bob]
    return inst, Strategy(s.kind, alice, bob, m.ravel(), canonical=True)
