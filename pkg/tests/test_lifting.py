import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamealg import games as G
from gamealg import instances as I
from gamealg import lifting as L
from gamealg import matcore as mc
from gamealg import starpoly as sp
from gamealg import sweep as S
from gamealg.xorsdp import PAULI_Z, solution_from_vectors

from conftest import rand_lam


def _assert_pvm(q, tol=1e-12):
    d = q[0].shape[0]
    for p in q:
        assert mc.op_norm(p @ p - p) <= tol
        assert mc.op_norm(p - mc.dagger(p)) <= tol
    assert mc.op_norm(sum(q) - np.eye(d)) <= tol


def _triangle_bob_images(strategy):
    return {sp.p_name(i, a): p for i, q in enumerate(strategy.bob) for a, p in enumerate(q)}


# --- synchronous ----------------------------------------------------------------------------


def test_lift_synchronous_exact_triangle():
    inst = I.instance("triangle-3col")
    mapped = L.synch_assignment_from_bcs(inst.assignment, inst.game)
    assert mapped.report.max_defect <= 1e-12
    res = L.lift_synchronous(mapped.assignment, inst.game)
    assert res.score["value"] == pytest.approx(1.0, abs=1e-10)
    _, base = I.sweep_base("triangle-3col")
    res = L.lift_synchronous(_triangle_bob_images(base), inst.game)
    assert res.score["value"] == pytest.approx(1.0, abs=1e-10)
    assert max(res.per_generator_distance.values()) <= 1e-12
    assert np.allclose(res.strategy.state, G.maximally_entangled_state(6))


def test_lift_synchronous_perturbed_structure_and_loss_identity(rng):
    inst, base = I.sweep_base("triangle-3col")
    for delta in (1e-3, 1e-2, 1e-1, 0.3):
        noisy = S.perturb_strategy(base, delta, rng, "additive-hermitian")
        raw = {k: v + delta * mc.random_hermitian(6, rng) for k, v in _triangle_bob_images(noisy).items()}
        res = L.lift_synchronous(raw, inst.game)
        for q in res.strategy.bob + res.strategy.alice:
            _assert_pvm(q)
        losing = 1.0 - np.asarray(res.extras["per_input"])
        assert np.allclose(losing, np.asarray(res.extras["loss_identity"]), atol=1e-10)


def test_lift_synchronous_tie_goes_to_lower_answer():
    g = G.graph_coloring_game(2, [(0, 1)], 2)
    half = 0.5 * np.eye(2, dtype=complex)
    images = {sp.p_name(i, a): half for i in range(2) for a in range(2)}
    res = L.lift_synchronous(images, g)
    assert set(res.extras["ties"]) == {0, 1}
    assert np.allclose(res.strategy.bob[0][0], np.eye(2))
    assert np.allclose(res.strategy.bob[0][1], 0)


def test_orthogonalize_pvm_recovers_exact():
    q = [np.diag([1, 0, 0]), np.diag([0, 1, 0]), np.diag([0, 0, 1])]
    out, ties = L.orthogonalize_pvm([p.astype(complex) for p in q])
    assert not ties
    assert all(np.allclose(a, b) for a, b in zip(out, q))


def test_lift_synchronous_rejects_nonsynchronous():
    with pytest.raises(ValueError):
        L.lift_synchronous({}, G.bcs_game(I.magic_square()))


def test_synch_assignment_from_bcs_linear_degradation():
    inst = I.instance("triangle-3col")
    g = inst.game
    big = {k: np.kron(v, np.eye(3)) for k, v in inst.assignment.items()}
    rng = np.random.default_rng(3)
    ratios = []
    for delta in (1e-4, 1e-3, 1e-2):
        noisy = {k: S.perturb_observable(v, delta, rng) for k, v in big.items()}
        z_def = sp.defect(sp.synchbcs_algebra(g), noisy, "f").max_defect
        out = L.synch_assignment_from_bcs(noisy, g)
        ratios.append(out.report.max_defect / z_def)
    assert max(ratios) <= 10 * min(ratios)
    with pytest.raises(ValueError):
        L.synch_assignment_from_bcs({"z[0,0]": np.eye(1)}, g)


# --- almost-commuting involution bounds ----------------------------------------------------


def _almost_commuting(k, d, delta, rng):
    """k involutions that commute up to O(delta): a shared diagonal frame, each tilted slightly."""
    base = mc.random_unitary(d, rng)
    out = []
    for _ in range(k):
        signs = rng.choice([-1.0, 1.0], size=d)
        u = mc.unitary_from_hermitian(mc.random_hermitian(d, rng), delta) @ base
        out.append(u @ np.diag(signs).astype(complex) @ mc.dagger(u))
    return out


def _prod(ops, d):
    out = np.eye(d, dtype=complex)
    for x in ops:
        out = out @ x
    return out


def _comm(xs, a, b):
    return mc.little_frobenius(xs[a] @ xs[b] - xs[b] @ xs[a])


def _inversion_cost(xs, order):
    """Sum of commutator norms over the pairs a permutation puts out of order."""
    return sum(_comm(xs, order[i], order[j]) for i, j in itertools.combinations(range(len(order)), 2) if order[i] > order[j])


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(2, 5), st.floats(1e-4, 0.3))
def test_monomial_rearrangement_bound(seed, d, k, delta):
    """Reordering a word in unitaries costs at most one commutator per inverted pair."""
    rng = np.random.default_rng(seed)
    xs = _almost_commuting(k, d, delta, rng)
    order = list(rng.permutation(k))
    lhs = mc.little_frobenius(_prod(xs, d) - _prod([xs[i] for i in order], d))
    assert lhs <= _inversion_cost(xs, order) + 1e-10


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.floats(1e-4, 0.3))
def test_square_of_product_bound(seed, d, delta):
    """(X1 X2 X3 X4)^2 is within the sum of the six pairwise commutators of the identity."""
    rng = np.random.default_rng(seed)
    xs = _almost_commuting(4, d, delta, rng)
    w = _prod(xs, d)
    lhs = mc.little_frobenius(w @ w - np.eye(d))
    rhs = sum(_comm(xs, a, b) for a, b in itertools.combinations(range(4), 2))
    assert lhs <= rhs + 1e-10
    assert rhs <= 6 * max(_comm(xs, a, b) for a, b in itertools.combinations(range(4), 2)) + 1e-12


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(2, 5), st.floats(1e-4, 0.3))
def test_subset_product_bound(seed, d, k, delta):
    """With prod_A X close to -1, prod_S X + prod_{A minus S} X is small.

    Bound: ||prod_A X + 1||_f, plus the commutators crossing S and its complement
    when the two sub-words are concatenated, plus every commutator inside the
    complement (reversing its word turns it into its adjoint).
    """
    rng = np.random.default_rng(seed)
    xs = _almost_commuting(k, d, delta, rng)
    xs[-1] = -xs[-1] if np.trace(_prod(xs, d)).real > 0 else xs[-1]
    mask = rng.integers(0, 2, size=k).astype(bool)
    s = [a for a in range(k) if mask[a]]
    rest = [a for a in range(k) if not mask[a]]
    lhs = mc.little_frobenius(_prod([xs[a] for a in s], d) + _prod([xs[a] for a in rest], d))
    e = mc.little_frobenius(_prod(xs, d) + np.eye(d))
    cross = _inversion_cost(xs, s + rest)
    inner = sum(_comm(xs, a, b) for a, b in itertools.combinations(rest, 2))
    assert lhs <= e + cross + inner + 1e-10


# --- BCS ------------------------------------------------------------------------------------


def test_lift_bcs_exact_magic_square():
    inst = I.instance("magic-square")
    res = L.lift_bcs(inst.assignment, inst.game)
    assert res.score["value"] == pytest.approx(1.0, abs=1e-10)
    assert all(v == 0 for v in res.extras["violating_dims"].values())
    assert max(res.extras["commuting_repair"].values()) <= 1e-12


def test_lift_bcs_classical_dim1():
    bcs = I.magic_square()
    # the magic square has no classical solution; use its row constraints alone
    rows = G.BinaryConstraintSystem(9, bcs.constraints[:3])
    sol = rows.classical_solutions()[0]
    images = {sp.x_name(j): np.array([[(-1.0) ** b]], dtype=complex) for j, b in enumerate(sol)}
    res = L.lift_bcs(images, rows)
    assert res.score["value"] == pytest.approx(1.0, abs=1e-12)


def test_lift_bcs_perturbed_structure(rng):
    inst = I.instance("magic-square")
    for delta in (1e-3, 1e-2, 0.2):
        noisy = {k: S.perturb_observable(np.kron(v, np.eye(2)), delta, rng) for k, v in inst.assignment.items()}
        res = L.lift_bcs(noisy, inst.game)
        for q in res.strategy.alice + res.strategy.bob:
            _assert_pvm(q)
        assert 1 - res.score["value"] <= 50 * delta**2 + 1e-10


def test_context_commuting_family_commutes(rng):
    xs = _almost_commuting(3, 8, 0.1, rng)
    v, signs = L.context_commuting_family(xs)
    zs = [(v * signs[:, k]) @ mc.dagger(v) for k in range(3)]
    for a, b in itertools.combinations(zs, 2):
        assert mc.op_norm(a @ b - b @ a) <= 1e-12
    for z in zs:
        assert mc.op_norm(z @ z - np.eye(8)) <= 1e-12


# --- XOR ------------------------------------------------------------------------------------


def test_lift_xor_exact_chsh():
    inst = I.instance("chsh")
    sol = inst.reference["solution"]
    res = L.lift_xor(inst.assignment, inst.game, sol)
    assert res.score["bias"] == pytest.approx(1 / np.sqrt(2), abs=1e-8)
    assert abs(res.score["gap_to_optimum"]) <= 1e-8


def test_lift_xor_one_by_one():
    g = G.XorGame([[0]], [[1.0]])
    sol = solution_from_vectors(g, [[1.0]], [[1.0]])
    res = L.lift_xor({"s[0]": PAULI_Z}, g, sol)
    assert res.score["bias"] == pytest.approx(1.0)
    assert res.score["gap_to_optimum"] == pytest.approx(0.0, abs=1e-12)


def test_lift_xor_chain_bound_on_perturbations(rng):
    inst = I.instance("chsh")
    sol = inst.reference["solution"]
    for delta in (1e-3, 1e-2, 1e-1, 0.5):
        noisy = {k: S.perturb_observable(v, delta, rng) for k, v in inst.assignment.items()}
        res = L.lift_xor(noisy, inst.game, sol)
        assert abs(res.score["gap_to_optimum"]) <= res.extras["chain_bound"] + 1e-9
        for x in res.strategy.alice + res.strategy.bob:
            assert mc.op_norm(x @ x - np.eye(x.shape[0])) <= 1e-12


def test_lift_xor_zero_marginal_row():
    g = G.XorGame([[0, 0], [0, 1]], [[0.25, 0.25], [0.25, 0.25]])
    sol = solution_from_vectors(g, [[1.0, 0], [0, 1.0]], [[1.0, 0], [1.0, 0]])
    with pytest.raises(ValueError, match="zero marginal"):
        L.lift_xor({"s[0]": PAULI_Z, "s[1]": PAULI_Z}, g, sol)


# --- state distance -------------------------------------------------------------------------


def test_state_distance_examples():
    out = L.state_distance_bound(mc.maximally_mixed_factor(3), np.eye(3))
    assert out.lhs == pytest.approx(0, abs=1e-12) and out.bound == pytest.approx(0, abs=1e-12)
    lam = mc.density_factor(np.diag(np.sqrt([0.9, 0.1])))
    out = L.state_distance_bound(lam, np.diag([1.0, 0.0]))
    assert out.bound == pytest.approx(0.7653668647301795, abs=1e-12)
    assert out.lhs == pytest.approx(np.hypot(np.sqrt(0.9) - 1, np.sqrt(0.1)))
    with pytest.raises(ValueError):
        L.state_distance_bound(lam, np.zeros((2, 2)))


def test_state_distance_full_rank_forces_maximally_mixed():
    lam = mc.density_factor(np.diag(np.sqrt([0.6, 0.4])))
    out = L.state_distance_bound(lam, np.eye(2))
    assert out.bound == 0.0 and out.lhs > 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_state_distance_dimension_bound(seed, d):
    rng = np.random.default_rng(seed)
    lam = rand_lam(d, rng)
    r = int(rng.integers(1, d + 1))
    spec = mc.spectral_decomposition(lam.matrix)
    v = spec.eigenvectors[:, np.argsort(spec.eigenvalues)[::-1][:r]]
    out = L.state_distance_bound(lam, v @ mc.dagger(v))
    assert out.lhs <= out.dimension_bound + 1e-9
