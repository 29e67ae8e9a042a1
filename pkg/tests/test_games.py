import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamealg import games as G
from gamealg import instances as I
from gamealg import matcore as mc
from gamealg import xorsdp as X

from conftest import rand_complex, rand_state


# --- boolean functions ----------------------------------------------------------------------


def test_fourier_examples():
    assert G.fourier_polynomial(G.TABLES["NOT"]) == {(0,): -1.0}
    assert G.fourier_polynomial(G.TABLES["AND"]) == {(): 0.5, (0,): 0.5, (1,): 0.5, (0, 1): -0.5}
    assert G.fourier_polynomial(G.TABLES["XOR"]) == {(0, 1): 1.0}
    assert G.fourier_polynomial(G.TABLES["OR"]) == {(): -0.5, (0,): 0.5, (1,): 0.5, (0, 1): 0.5}


def test_fourier_bad_length():
    with pytest.raises(ValueError):
        G.fourier_polynomial((0, 1, 1))
    with pytest.raises(ValueError):
        G.fourier_polynomial((1,))


def test_fourier_roundtrip_exhaustive_small():
    for k in (1, 2, 3):
        for table in itertools.product((0, 1), repeat=1 << k):
            coeffs = G.fourier_polynomial(table)
            assert G.truth_table_from_polynomial(coeffs, k) == table
            for idx, bits in enumerate(itertools.product((0, 1), repeat=k)):
                x = [(-1) ** b for b in bits]
                assert G.evaluate_multilinear(coeffs, x) == (-1) ** table[idx]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10).flatmap(lambda k: st.lists(st.integers(0, 1), min_size=1 << k, max_size=1 << k)))
def test_fourier_values_are_signs(table):
    k = G.table_arity(table)
    coeffs = G.fourier_polynomial(table)
    assert G.truth_table_from_polynomial(coeffs, k) == tuple(table)


def test_fourier_roundtrip_all_four_bit_tables_sampled(rng):
    for _ in range(300):
        table = tuple(int(t) for t in rng.integers(0, 2, 16))
        assert G.truth_table_from_polynomial(G.fourier_polynomial(table), 4) == table


# --- games ----------------------------------------------------------------------------------


def test_magic_square_bcs_game():
    game = G.bcs_game(I.magic_square())
    assert game.n_alice == 6 and game.n_bob == 9
    assert game.alice_answers == (4,) * 6
    assert game.eta.sum() == pytest.approx(1)
    assert np.count_nonzero(game.eta) == 18


def test_single_constraint_game():
    bcs = G.BinaryConstraintSystem(1, (G.Constraint((0,), (1, 0)),))
    assert G.bcs_game(bcs).alice_answers == (1,)
    bad = G.BinaryConstraintSystem(1, (G.Constraint((0,), (0, 0)),))
    with pytest.raises(ValueError):
        G.bcs_game(bad)


def test_constraint_validation():
    with pytest.raises(ValueError):
        G.Constraint((), ())
    with pytest.raises(ValueError):
        G.Constraint((0, 1), (0, 1))
    with pytest.raises(ValueError):
        G.BinaryConstraintSystem(2, (G.Constraint((0, 5), (0, 1, 1, 0)),))


def test_synchbcs_game():
    tri = I.triangle_game()
    b = G.synchbcs_game(tri)
    assert b.n == 9
    assert sum(1 for c in b.constraints if len(c.scope) == 3) == 3
    assert sum(1 for c in b.constraints if len(c.scope) == 2) == len(tri.losing_pairs())
    delta = G.synchronous_game(np.eye(2).reshape(1, 1, 2, 2))
    bd = G.synchbcs_game(delta)
    assert bd.n == 2 and bd.m == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_synchbcs_variable_count(nq, na, seed):
    g = _random_synchronous(nq, na, np.random.default_rng(seed))
    assert G.synchbcs_game(g).n == nq * na


def _random_synchronous(nq, na, rng):
    v = rng.integers(0, 2, (nq, nq, na, na))
    for i in range(nq):
        v[i, i] = np.eye(na, dtype=int) * v[i, i]
    return G.synchronous_game(v)


def test_value_classical_coloring():
    inst = I.instance("triangle-3col")
    assert G.game_value(inst.game, inst.strategy).value == pytest.approx(1)


def test_value_mermin_peres():
    inst = I.instance("magic-square")
    val = G.game_value(G.bcs_game(inst.game), inst.strategy)
    assert val.value == pytest.approx(1, abs=1e-10)
    assert np.all(val.per_input[inst.game.constraints[0].scope[0]] >= 0)


def test_value_random_answering_triangle():
    g = I.triangle_game()
    ops = [[np.diag(np.eye(3)[a]).astype(complex) for a in range(3)] for _ in range(3)]
    plus = np.ones(3) / np.sqrt(3)
    s = G.Strategy("pvm", ops, ops, np.kron(plus, plus))
    val = G.game_value(g, s)
    off = ~np.eye(3, dtype=bool)
    assert np.allclose(val.per_input[off], 2 / 3)
    assert np.allclose(np.diag(val.per_input), 1 / 3)
    assert val.value == pytest.approx(5 / 9)


def test_value_rejects_observables():
    inst = I.instance("chsh")
    with pytest.raises(ValueError):
        G.game_value(I.triangle_game(), inst.strategy)


def _classical_xor_strategy(signs_a, signs_b):
    one = lambda s: np.array([[s]], dtype=complex)  # noqa: E731
    return G.Strategy("observable", [one(s) for s in signs_a], [one(s) for s in signs_b], np.ones(1))


def test_xor_bias_classical_chsh_bruteforce():
    g = G.chsh_game()
    best = max(
        G.xor_bias(g, _classical_xor_strategy(a, b))
        for a in itertools.product((1, -1), repeat=2)
        for b in itertools.product((1, -1), repeat=2)
    )
    assert best == 0.5


def test_xor_bias_tsirelson():
    g = G.chsh_game()
    assert G.xor_bias(g, X.tsirelson_strategy(X.optimal_bias(g))) == pytest.approx(1 / np.sqrt(2), abs=1e-9)


def test_xor_bias_identity():
    g = G.chsh_game()
    s = _classical_xor_strategy((1, 1), (1, 1))
    assert G.xor_bias(g, s) == pytest.approx(g.cost.sum())


def _random_pvm(d, k, rng):
    u = mc.random_unitary(d, rng)
    labels = rng.integers(0, k, d)
    return [u @ np.diag((labels == a).astype(float)) @ mc.dagger(u) for a in range(k)]


def _random_observable(d, rng):
    u = mc.random_unitary(d, rng)
    return u @ np.diag(rng.choice([-1.0, 1.0], d)) @ mc.dagger(u)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_correlations_are_distributions(da, db, seed):
    rng = np.random.default_rng(seed)
    g = I.triangle_game()
    s = G.Strategy(
        "pvm",
        [_random_pvm(da, 3, rng) for _ in range(3)],
        [_random_pvm(db, 3, rng) for _ in range(3)],
        rand_state(da * db, rng),
    )
    p = G.correlations(g, s)
    assert np.all(p >= -1e-10)
    assert np.allclose(p.sum(axis=(2, 3)), 1, atol=1e-10)
    v = G.game_value(g, s).value
    assert -1e-10 <= v <= 1 + 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_bias_in_range(d, seed):
    rng = np.random.default_rng(seed)
    g = G.chsh_game()
    s = G.Strategy("observable", [_random_observable(d, rng) for _ in range(2)], [_random_observable(d, rng) for _ in range(2)], rand_state(d * d, rng))
    assert -1 - 1e-10 <= G.xor_bias(g, s) <= 1 + 1e-10


def test_strategy_validation():
    with pytest.raises(ValueError):
        G.Strategy("pvm", [[np.eye(2)]], [[np.eye(2)]], np.ones(4))
    with pytest.raises(ValueError):
        G.Strategy("pvm", [[np.diag([1.0, 0.0])]], [[np.eye(2)]], np.ones(4) / 2)
    with pytest.raises(ValueError):
        G.Strategy("observable", [np.eye(2) * 0.5], [np.eye(2)], np.ones(4) / 2)
    with pytest.raises(ValueError):
        G.Strategy("mixed", [], [], np.ones(1))


# --- canonical form -------------------------------------------------------------------------


def test_canonicalize_maximally_entangled(rng):
    d = 3
    xs = [_random_observable(d, rng) for _ in range(2)]
    s = G.Strategy("observable", xs, xs, G.maximally_entangled_state(d))
    can = G.canonicalize(s)
    assert np.allclose(can.lam.matrix, np.eye(d) / np.sqrt(d))


def test_canonicalize_product_state(rng):
    a, b = rand_state(2, rng), rand_state(3, rng)
    s = G.Strategy("observable", [np.eye(2)], [np.eye(3)], np.kron(a, b))
    can = G.canonicalize(s)
    ev = np.diag(can.lam.matrix).real
    assert ev[0] == pytest.approx(1) and np.allclose(ev[1:], 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_canonicalize_preserves_correlations(da, db, seed):
    rng = np.random.default_rng(seed)
    g = I.triangle_game()
    s = G.Strategy("pvm", [_random_pvm(da, 3, rng) for _ in range(3)], [_random_pvm(db, 3, rng) for _ in range(3)], rand_state(da * db, rng))
    can = G.canonicalize(s)
    assert can.strategy.canonical
    assert np.allclose(G.correlations(g, s), G.correlations(g, can.strategy), atol=1e-10)
    lam = np.diag(can.lam.matrix).real
    assert np.all(np.diff(lam) <= 1e-15)
    so = G.Strategy("observable", [_random_observable(da, rng) for _ in range(2)], [_random_observable(db, rng) for _ in range(2)], rand_state(da * db, rng))
    co = G.canonicalize(so).strategy
    assert G.xor_bias(G.chsh_game(), so) == pytest.approx(G.xor_bias(G.chsh_game(), co), abs=1e-10)


def test_tensor_vs_factor_examples(rng):
    d = 3
    s = G.canonicalize(G.Strategy("observable", [np.eye(d)], [np.eye(d)], rand_state(d * d, rng))).strategy
    r = G.tensor_vs_factor_norm(np.eye(d), np.eye(d), s)
    assert r.lhs == pytest.approx(0, abs=1e-12) and r.rhs == pytest.approx(0, abs=1e-12)
    e = np.diag(rng.standard_normal(d))
    r = G.tensor_vs_factor_norm(e, e, s)
    assert r.lhs == pytest.approx(0, abs=1e-12) and r.rhs == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        G.tensor_vs_factor_norm(rand_complex(d, rng), e, s)


def test_tensor_vs_factor_random(rng):
    for _ in range(50):
        d = int(rng.integers(1, 6))
        s = G.canonicalize(G.Strategy("observable", [np.eye(d)], [np.eye(d)], rand_state(d * d, rng))).strategy
        e, f = mc.random_hermitian(d, rng), mc.random_hermitian(d, rng)
        r = G.tensor_vs_factor_norm(e, f, s)
        assert abs(r.lhs - r.rhs) <= 1e-10


# --- BCS satisfiability vs perfect deterministic strategies -----------------------------------


def _perfect_deterministic_exists(bcs):
    game = G.bcs_game(bcs)
    one = lambda v: np.array([[v]], dtype=complex)  # noqa: E731
    for bits in itertools.product((0, 1), repeat=bcs.n):
        alice = []
        for c in bcs.constraints:
            sats = c.satisfying()
            want = tuple(bits[j] for j in c.scope)
            pick = sats.index(want) if want in sats else 0
            alice.append([one(1.0 if a == pick else 0.0) for a in range(len(sats))])
        bob = [[one(1.0 - b), one(float(b))] for b in bits]
        if G.game_value(game, G.Strategy("pvm", alice, bob, np.ones(1))).value > 1 - 1e-12:
            return True
    return False


def _random_bcs(n, m, rng):
    cons = []
    while len(cons) < m:
        k = int(rng.integers(1, min(n, 3) + 1))
        scope = tuple(int(x) for x in rng.choice(n, k, replace=False))
        table = tuple(int(t) for t in rng.integers(0, 2, 1 << k))
        if any(table):
            cons.append(G.Constraint(scope, table))
    return G.BinaryConstraintSystem(n, tuple(cons))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_classical_satisfiable_iff_perfect_deterministic(n, m, seed):
    bcs = _random_bcs(n, m, np.random.default_rng(seed))
    assert bool(bcs.classical_solutions()) == _perfect_deterministic_exists(bcs)


def test_magic_square_has_no_classical_solution():
    assert I.magic_square().classical_solutions() == []


def test_game_json_roundtrip():
    for obj in (I.triangle_game(), I.magic_square(), G.chsh_game()):
        back = G.game_from_json(json.loads(json.dumps(obj.to_json())))
        assert json.dumps(back.to_json()) == json.dumps(obj.to_json())
    with pytest.raises(ValueError):
        G.game_from_json({"kind": "poker"})
    with pytest.raises(ValueError):
        G.game_from_json({"kind": "xor", "T": [[0]]})


def test_strategy_json_roundtrip():
    s = I.instance("magic-square").strategy
    back = G.Strategy.from_json(json.loads(json.dumps(s.to_json())))
    assert all(np.array_equal(a, b) for qa, qb in zip(s.alice, back.alice) for a, b in zip(qa, qb))
    assert np.array_equal(s.state, back.state)
