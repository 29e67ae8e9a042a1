"""Nonlocal games, binary constraint systems, XOR games and finite-dimensional strategies."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore as mc

ETA_TOL = 1e-12
OP_TOL = 1e-10
STATE_TOL = 1e-12


# --- games --------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NonlocalGame:
    """Two-player game with per-question answer counts.

    ``predicate[i, j, a, b]`` is 1 when answers (a, b) win on questions (i, j); entries
    for answers beyond a question's answer count are ignored (and stored as 0).
    """

    predicate: np.ndarray
    eta: np.ndarray
    alice_answers: tuple
    bob_answers: tuple
    alice_labels: tuple | None = None
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.predicate)
        eta = np.asarray(self.eta, dtype=float)
        n_i, n_j = len(self.alice_answers), len(self.bob_answers)
        if n_i < 1 or n_j < 1:
            raise ValueError("games need at least one question per player")
        shape = (n_i, n_j, max(self.alice_answers), max(self.bob_answers))
        if v.shape != shape:
            raise ValueError(f"predicate has shape {v.shape}, expected {shape}")
        if not np.all((v == 0) | (v == 1)):
            raise ValueError("predicate entries must be 0 or 1")
        if eta.shape != (n_i, n_j):
            raise ValueError(f"eta has shape {eta.shape}, expected {(n_i, n_j)}")
        if np.any(eta < 0) or abs(eta.sum() - 1) > ETA_TOL:
            raise ValueError(f"eta must be a probability distribution (sum {eta.sum():.15g})")
        if min(self.alice_answers) < 1 or min(self.bob_answers) < 1:
            raise ValueError("every question needs at least one answer")
        object.__setattr__(self, "predicate", v.astype(np.int8))
        object.__setattr__(self, "eta", eta)

    @property
    def n_alice(self) -> int:
        return len(self.alice_answers)

    @property
    def n_bob(self) -> int:
        return len(self.bob_answers)

    def wins(self, i, j, a, b) -> bool:
        return bool(self.predicate[i, j, a, b])

    def is_synchronous(self) -> bool:
        if self.n_alice != self.n_bob or set(self.alice_answers) | set(self.bob_answers) != {self.alice_answers[0]}:
            return False
        n_a = self.alice_answers[0]
        for i in range(self.n_alice):
            for a, b in itertools.permutations(range(n_a), 2):
                if self.predicate[i, i, a, b]:
                    return False
        return True

    # synchronous conveniences
    @property
    def n_questions(self) -> int:
        return self.n_alice

    @property
    def n_answers(self) -> int:
        return self.alice_answers[0]

    def losing_tuples(self) -> list[tuple[int, int, int, int]]:
        """All ordered (i, a, j, b) with V(a, b | i, j) = 0, in lexicographic order."""
        out = []
        for i in range(self.n_alice):
            for a in range(self.alice_answers[i]):
                for j in range(self.n_bob):
                    for b in range(self.bob_answers[j]):
                        if not self.predicate[i, j, a, b]:
                            out.append((i, a, j, b))
        return out

    def losing_pairs(self) -> list[tuple[int, int, int, int]]:
        """Losing tuples with (i, a) <= (j, b), merging the two orders of a symmetric pair."""
        seen = set()
        for i, a, j, b in self.losing_tuples():
            key = min((i, a), (j, b)) + max((i, a), (j, b))
            seen.add(key)
        return sorted(seen)

    def to_json(self) -> dict:
        out = {
            "kind": "synchronous" if self.is_synchronous() else "predicate",
            "name": self.name,
            "alice_answers": list(self.alice_answers),
            "bob_answers": list(self.bob_answers),
            "predicate": self.predicate.tolist(),
            "eta": self.eta.tolist(),
        }
        if self.alice_labels is not None:
            out["alice_labels"] = [[list(x) for x in q] for q in self.alice_labels]
        return out


def require_synchronous(game) -> None:
    if not isinstance(game, NonlocalGame) or not game.is_synchronous():
        raise ValueError("a synchronous game is required (same question/answer sets, V(a,b|i,i)=0 for a != b)")


def synchronous_game(predicate, eta=None, name: str = "") -> NonlocalGame:
    """Build a synchronous game from a (n, n, k, k) predicate; eta defaults to uniform."""
    v = np.asarray(predicate)
    n, _, k, _ = v.shape
    if eta is None:
        eta = np.full((n, n), 1.0 / (n * n))
    g = NonlocalGame(v, eta, (k,) * n, (k,) * n, name=name)
    require_synchronous(g)
    return g


def graph_coloring_game(n_vertices: int, edges: Sequence[tuple[int, int]], n_colors: int, eta=None, name: str = "") -> NonlocalGame:
    """Synchronous coloring game: equal vertices need equal colors, adjacent ones distinct colors."""
    adj = np.zeros((n_vertices, n_vertices), dtype=bool)
    for u, w in edges:
        adj[u, w] = adj[w, u] = True
    v = np.ones((n_vertices, n_vertices, n_colors, n_colors), dtype=np.int8)
    same = np.eye(n_colors, dtype=np.int8)
    for i in range(n_vertices):
        for j in range(n_vertices):
            if i == j:
                v[i, j] = same
            elif adj[i, j]:
                v[i, j] = 1 - same
    return synchronous_game(v, eta, name)


# --- boolean functions --------------------------------------------------------------------


def bits_of(index: int, k: int) -> tuple[int, ...]:
    """Bits of ``index`` with the first scope variable as the most significant bit."""
    return tuple((index >> (k - 1 - m)) & 1 for m in range(k))


def table_arity(table) -> int:
    n = len(table)
    k = n.bit_length() - 1
    if n < 2 or (1 << k) != n:
        raise ValueError(f"truth table length {n} is not 2^k with k >= 1")
    return k


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, out[s] = sum_a (-1)^{popcount(s & a)} v[a]."""
    out = np.array(v, dtype=float)
    h = 1
    while h < out.size:
        out = out.reshape(-1, 2, h)
        out = np.stack((out[:, 0] + out[:, 1], out[:, 0] - out[:, 1]), axis=1).reshape(-1)
        h *= 2
    return out


def _mask_positions(mask: int, k: int) -> tuple[int, ...]:
    return tuple(m for m in range(k) if (mask >> (k - 1 - m)) & 1)


def fourier_polynomial(table) -> dict[tuple[int, ...], float]:
    """Coefficients of the multilinear f with f((-1)^a) = (-1)^{g(a)}.

    Keys are sorted position tuples alpha (positions within the scope); zero
    coefficients are dropped.  Coefficients are exact dyadic rationals, computed as
    2^-k sum_x f(x) x^alpha through a Walsh-Hadamard transform.
    """
    k = table_arity(table)
    signs = 1.0 - 2.0 * np.asarray(table, dtype=float)
    coeffs = _walsh_hadamard(signs) / (1 << k)
    out = {}
    for mask in sorted(range(1 << k), key=lambda m: (bin(m).count("1"), _mask_positions(m, k))):
        if coeffs[mask] != 0:
            out[_mask_positions(mask, k)] = float(coeffs[mask])
    return out


def evaluate_multilinear(coeffs: dict, x: Sequence[float]) -> float:
    return float(sum(c * np.prod([x[m] for m in alpha]) for alpha, c in coeffs.items()))


def truth_table_from_polynomial(coeffs: dict, k: int) -> tuple[int, ...]:
    """Evaluate f on every +-1 input and read back the table; raises if f is not +-1 valued."""
    dense = np.zeros(1 << k)
    for alpha, c in coeffs.items():
        dense[sum(1 << (k - 1 - m) for m in alpha)] = c
    vals = _walsh_hadamard(dense)
    if np.any(np.abs(np.abs(vals) - 1) > 1e-9):
        raise ValueError("polynomial is not +-1 valued")
    return tuple(int(v < 0) for v in vals)


TABLES = {
    "NOT": (1, 0),
    "AND": (0, 0, 0, 1),
    "OR": (0, 1, 1, 1),
    "XOR": (0, 1, 1, 0),
    "NAND": (1, 1, 1, 0),
}


def parity_table(k: int, odd: bool = True) -> tuple[int, ...]:
    """Table satisfied when the number of 1-bits (i.e. of -1 values) is odd (or even)."""
    return tuple(int((bin(idx).count("1") % 2 == 1) == odd) for idx in range(1 << k))


# --- binary constraint systems ------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    scope: tuple
    table: tuple

    def __post_init__(self):
        scope = tuple(int(s) for s in self.scope)
        table = tuple(int(t) for t in self.table)
        if len(scope) == 0:
            raise ValueError("constraint scope is empty")
        if len(set(scope)) != len(scope):
            raise ValueError(f"repeated variable in scope {scope}")
        if any(t not in (0, 1) for t in table):
            raise ValueError("truth table entries must be 0 or 1")
        if len(table) != 1 << len(scope):
            raise ValueError(f"table length {len(table)} != 2^{len(scope)}")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "table", table)

    def satisfying(self) -> list[tuple[int, ...]]:
        """Satisfying bit assignments in lexicographic order."""
        k = len(self.scope)
        return [bits_of(idx, k) for idx in range(1 << k) if self.table[idx]]


@dataclass(frozen=True)
class BinaryConstraintSystem:
    n: int
    constraints: tuple
    name: str = ""

    def __post_init__(self):
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        for idx, c in enumerate(cons):
            if any(s < 0 or s >= self.n for s in c.scope):
                raise ValueError(f"constraint {idx} scope {c.scope} outside 0..{self.n - 1}")
        object.__setattr__(self, "constraints", cons)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def satisfied_by(self, bits: Sequence[int]) -> bool:
        for c in self.constraints:
            idx = int("".join(str(int(bits[s])) for s in c.scope), 2)
            if not c.table[idx]:
                return False
        return True

    def classical_solutions(self) -> list[tuple[int, ...]]:
        return [b for b in itertools.product((0, 1), repeat=self.n) if self.satisfied_by(b)]

    def to_json(self) -> dict:
        return {
            "kind": "bcs",
            "name": self.name,
            "n": self.n,
            "constraints": [{"scope": list(c.scope), "table": list(c.table)} for c in self.constraints],
        }


def bcs_game(bcs: BinaryConstraintSystem, eta: str | np.ndarray = "in-scope") -> NonlocalGame:
    """Alice answers a constraint with a satisfying assignment, Bob a variable with a bit.

    Bob's answer b in {0, 1} stands for the value (-1)^b.  ``eta`` is ``"in-scope"``
    (uniform over constraint/variable pairs with the variable in the scope),
    ``"uniform"`` (all pairs) or an explicit (m, n) array.
    """
    sats = []
    for idx, c in enumerate(bcs.constraints):
        s = c.satisfying()
        if not s:
            raise ValueError(f"constraint {idx} has no satisfying assignment")
        sats.append(s)
    m, n = bcs.m, bcs.n
    max_a = max(len(s) for s in sats)
    v = np.zeros((m, n, max_a, 2), dtype=np.int8)
    for i, (c, s) in enumerate(zip(bcs.constraints, sats)):
        for j in range(n):
            for a, bits in enumerate(s):
                if j in c.scope:
                    pos = c.scope.index(j)
                    v[i, j, a, bits[pos]] = 1
                else:
                    v[i, j, a, :] = 1
    if isinstance(eta, str):
        if eta == "in-scope":
            w = np.zeros((m, n))
            for i, c in enumerate(bcs.constraints):
                w[i, list(c.scope)] = 1
        elif eta == "uniform":
            w = np.ones((m, n))
        else:
            raise ValueError(f"unknown eta mode {eta!r}")
        eta = w / w.sum()
    return NonlocalGame(v, eta, tuple(len(s) for s in sats), (2,) * n, tuple(tuple(s) for s in sats), bcs.name)


def synchbcs_game(game: NonlocalGame) -> BinaryConstraintSystem:
    """BCS with one variable per (question, answer); bit 1 means "answer chosen".

    Each losing pair contributes a NAND constraint (a unary NOT when both ends
    coincide) and each question an odd-parity constraint over its answers.
    """
    require_synchronous(game)
    k = game.n_answers
    var = lambda i, a: i * k + a  # noqa: E731
    cons = []
    for i, a, j, b in game.losing_pairs():
        if (i, a) == (j, b):
            cons.append(Constraint((var(i, a),), TABLES["NOT"]))
        else:
            cons.append(Constraint((var(i, a), var(j, b)), TABLES["NAND"]))
    for i in range(game.n_questions):
        cons.append(Constraint(tuple(var(i, a) for a in range(k)), parity_table(k, odd=True)))
    return BinaryConstraintSystem(game.n_questions * k, tuple(cons), f"synchbcs({game.name})")


# --- XOR games ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class XorGame:
    T: np.ndarray
    pi: np.ndarray
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.T, dtype=int)
        p = np.asarray(self.pi, dtype=float)
        if t.ndim != 2 or t.shape != p.shape:
            raise ValueError(f"T {t.shape} and pi {p.shape} must be matching 2-d arrays")
        if not np.all((t == 0) | (t == 1)):
            raise ValueError("T entries must be 0 or 1")
        if np.any(p < 0) or abs(p.sum() - 1) > ETA_TOL:
            raise ValueError("pi must be a probability distribution")
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "pi", p)

    @property
    def cost(self) -> np.ndarray:
        return np.where(self.T == 1, -1.0, 1.0) * self.pi

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def n(self) -> int:
        return self.T.shape[1]

    def to_json(self) -> dict:
        return {"kind": "xor", "name": self.name, "T": self.T.tolist(), "pi": self.pi.tolist()}


def chsh_game() -> XorGame:
    return XorGame(np.array([[0, 0], [0, 1]]), np.full((2, 2), 0.25), "chsh")


# --- strategies ---------------------------------------------------------------------------


def _check_projection(p, where):
    if mc.op_norm(p - mc.dagger(p)) > OP_TOL or mc.op_norm(p @ p - p) > OP_TOL:
        raise ValueError(f"{where}: not an orthogonal projection")


def _check_involution(x, where):
    d = x.shape[0]
    if mc.op_norm(x - mc.dagger(x)) > OP_TOL or mc.op_norm(x @ x - mc.identity(d)) > OP_TOL:
        raise ValueError(f"{where}: not a self-adjoint unitary")


@dataclass(frozen=True, eq=False)
class Strategy:
    """Measurements for both players plus a shared state on C^dA (x) C^dB.

    ``kind == "pvm"``: ``alice[i]`` is a tuple of projections, one per answer.
    ``kind == "observable"``: ``alice[i]`` is a single self-adjoint unitary.
    The state is a vector of length dA*dB indexed by ``a * dB + b``.
    """

    kind: str
    alice: tuple
    bob: tuple
    state: np.ndarray
    canonical: bool = False

    def __post_init__(self):
        if self.kind not in ("pvm", "observable"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "pvm":
            alice = tuple(tuple(mc.as_matrix(p) for p in q) for q in self.alice)
            bob = tuple(tuple(mc.as_matrix(p) for p in q) for q in self.bob)
        else:
            alice = tuple(mc.as_matrix(x) for x in self.alice)
            bob = tuple(mc.as_matrix(x) for x in self.bob)
        state = np.asarray(self.state, dtype=complex).ravel()
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "state", state)
        da, db = self.dims
        if state.shape != (da * db,):
            raise ValueError(f"state has length {state.size}, expected {da * db}")
        if abs(np.linalg.norm(state) - 1) > STATE_TOL:
            raise ValueError(f"state norm {np.linalg.norm(state):.15g} != 1")
        for side, fam, d in (("alice", alice, da), ("bob", bob, db)):
            for i, q in enumerate(fam):
                if self.kind == "pvm":
                    total = np.zeros((d, d), dtype=complex)
                    for a, p in enumerate(q):
                        if p.shape != (d, d):
                            raise ValueError(f"{side}[{i}][{a}]: inconsistent dimension")
                        _check_projection(p, f"{side}[{i}][{a}]")
                        total += p
                    if mc.op_norm(total - mc.identity(d)) > OP_TOL:
                        raise ValueError(f"{side}[{i}]: projections do not sum to identity")
                else:
                    if q.shape != (d, d):
                        raise ValueError(f"{side}[{i}]: inconsistent dimension")
                    _check_involution(q, f"{side}[{i}]")

    @property
    def dims(self) -> tuple[int, int]:
        def first(fam):
            q = fam[0]
            return (q[0] if self.kind == "pvm" else q).shape[0]

        return first(self.alice), first(self.bob)

    def coefficient_matrix(self) -> np.ndarray:
        da, db = self.dims
        return self.state.reshape(da, db)

    def lam(self) -> mc.DensityFactor:
        if not self.canonical:
            raise ValueError("strategy is not in canonical form")
        return mc.density_factor(np.diag(np.diag(self.coefficient_matrix()).real))

    def to_json(self) -> dict:
        enc = (lambda q: [mc.matrix_to_json(p) for p in q]) if self.kind == "pvm" else mc.matrix_to_json
        return {
            "kind": self.kind,
            "alice": [enc(q) for q in self.alice],
            "bob": [enc(q) for q in self.bob],
            "state": {"re": self.state.real.tolist(), "im": self.state.imag.tolist()},
            "canonical": self.canonical,
        }

    @classmethod
    def from_json(cls, obj: dict) -> Strategy:
        try:
            kind = obj["kind"]
            dec = (lambda q: [mc.matrix_from_json(p) for p in q]) if kind == "pvm" else mc.matrix_from_json
            state = np.asarray(obj["state"]["re"], dtype=float) + 1j * np.asarray(
                obj["state"].get("im", np.zeros(len(obj["state"]["re"]))), dtype=float
            )
            return cls(kind, [dec(q) for q in obj["alice"]], [dec(q) for q in obj["bob"]], state, bool(obj.get("canonical", False)))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed strategy: {exc}") from exc


def maximally_entangled_state(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex).ravel() / np.sqrt(d)


def expectation(a: np.ndarray, b: np.ndarray, m: np.ndarray) -> complex:
    """<psi| A (x) B |psi> for psi with coefficient matrix ``m``: tr(M^* A M B^T)."""
    return complex(np.vdot(m, a @ m @ b.T))


def correlations(game: NonlocalGame, s: Strategy) -> np.ndarray:
    """p(a, b | i, j) as an array of the predicate's shape (zero beyond answer counts)."""
    if s.kind != "pvm":
        raise ValueError("predicate games need a PVM strategy")
    _check_shapes(game, s)
    m = s.coefficient_matrix()
    p = np.zeros(game.predicate.shape)
    for i, qa in enumerate(s.alice):
        left = [pa @ m for pa in qa]
        for j, qb in enumerate(s.bob):
            for a, lm in enumerate(left):
                for b, pb in enumerate(qb):
                    p[i, j, a, b] = np.vdot(m, lm @ pb.T).real
    return p


def _check_shapes(game: NonlocalGame, s: Strategy):
    if len(s.alice) != game.n_alice or len(s.bob) != game.n_bob:
        raise ValueError(
            f"strategy has {len(s.alice)}x{len(s.bob)} questions, game {game.n_alice}x{game.n_bob}"
        )
    for i, q in enumerate(s.alice):
        if len(q) != game.alice_answers[i]:
            raise ValueError(f"alice[{i}] has {len(q)} outcomes, game expects {game.alice_answers[i]}")
    for j, q in enumerate(s.bob):
        if len(q) != game.bob_answers[j]:
            raise ValueError(f"bob[{j}] has {len(q)} outcomes, game expects {game.bob_answers[j]}")


@dataclass
class GameValue:
    value: float
    per_input: np.ndarray


def game_value(game: NonlocalGame, s: Strategy) -> GameValue:
    p = correlations(game, s)
    per = np.einsum("ijab,ijab->ij", p, game.predicate.astype(float))
    return GameValue(float(np.sum(game.eta * per)), per)


def xor_bias(game: XorGame, s: Strategy) -> float:
    if s.kind != "observable":
        raise ValueError("XOR bias needs an observable strategy")
    if len(s.alice) != game.m or len(s.bob) != game.n:
        raise ValueError(f"strategy has {len(s.alice)}x{len(s.bob)} observables, game is {game.m}x{game.n}")
    m = s.coefficient_matrix()
    g = game.cost
    total = 0j
    for i, y in enumerate(s.alice):
        ym = y @ m
        for j, x in enumerate(s.bob):
            if g[i, j] != 0:
                total += g[i, j] * np.vdot(m, ym @ x.T)
    if abs(total.imag) > 1e-10:
        raise ValueError(f"bias has imaginary part {total.imag:.3e}; observables not self-adjoint?")
    return float(total.real)


# --- canonical form -----------------------------------------------------------------------


@dataclass
class Canonical:
    strategy: Strategy
    lam: mc.DensityFactor
    alice_basis: np.ndarray
    bob_basis: np.ndarray


def _embed(x: np.ndarray, d: int, fill: np.ndarray) -> np.ndarray:
    k = x.shape[0]
    out = np.zeros((d, d), dtype=complex)
    out[:k, :k] = x
    out[k:, k:] = fill[: d - k, : d - k]
    return out


def canonicalize(s: Strategy) -> Canonical:
    """Rewrite the state as sum_t |t> (x) lam|t> with lam diagonal and nonincreasing.

    Local bases come from the SVD of the coefficient matrix; operators are
    conjugated accordingly.  When the local dimensions differ the smaller side is
    padded: padded PVMs put the extra block into answer 0, padded observables act as
    the identity there.  Zero Schmidt coefficients are kept.
    """
    m = s.coefficient_matrix()
    da, db = m.shape
    u, sig, vh = np.linalg.svd(m, full_matrices=True)
    w = vh.T  # Bob's new basis vectors are the rows of vh
    d = max(da, db)
    sig_full = np.zeros(d)
    sig_full[: sig.size] = sig
    eye = mc.identity(d)

    def conv(x, basis, dim, first):
        y = mc.dagger(basis) @ x @ basis
        if dim == d:
            return y
        return _embed(y, d, eye if first else np.zeros((d, d)))

    if s.kind == "pvm":
        alice = tuple(tuple(conv(p, u, da, a == 0) for a, p in enumerate(q)) for q in s.alice)
        bob = tuple(tuple(conv(p, w, db, b == 0) for b, p in enumerate(q)) for q in s.bob)
    else:
        alice = tuple(conv(x, u, da, True) for x in s.alice)
        bob = tuple(conv(x, w, db, True) for x in s.bob)
    state = np.diag(sig_full).astype(complex).ravel()
    state /= np.linalg.norm(state)
    out = Strategy(s.kind, alice, bob, state, canonical=True)
    return Canonical(out, mc.density_factor(np.diag(sig_full), normalize=True), u, w)


def canonical_lam(s: Strategy) -> mc.DensityFactor:
    return canonicalize(s).lam if not s.canonical else s.lam()


@dataclass
class FactorComparison:
    lhs: float
    rhs: float


def tensor_vs_factor_norm(e: np.ndarray, f: np.ndarray, s: Strategy) -> FactorComparison:
    """||(E (x) 1 - 1 (x) F) psi|| against ||lam conj(E) - F lam||_F for a canonical strategy."""
    if not s.canonical:
        raise ValueError("strategy must be canonical")
    e, f = mc.as_matrix(e), mc.as_matrix(f)
    for name, x in (("E", e), ("F", f)):
        if mc.op_norm(x - mc.dagger(x)) > OP_TOL:
            raise ValueError(f"{name} is not self-adjoint")
    m = s.coefficient_matrix()
    lhs = mc.frobenius(e @ m - m @ f.T)
    lam = s.lam().matrix
    rhs = mc.frobenius(lam @ np.conj(e) - f @ lam)
    return FactorComparison(lhs, rhs)


# --- JSON ---------------------------------------------------------------------------------


def game_from_json(obj: dict):
    try:
        kind = obj["kind"]
        if kind == "bcs":
            cons = tuple(Constraint(tuple(c["scope"]), tuple(c["table"])) for c in obj["constraints"])
            return BinaryConstraintSystem(int(obj["n"]), cons, obj.get("name", ""))
        if kind == "xor":
            return XorGame(np.array(obj["T"]), np.array(obj["pi"], dtype=float), obj.get("name", ""))
        if kind in ("predicate", "synchronous"):
            labels = obj.get("alice_labels")
            if labels is not None:
                labels = tuple(tuple(tuple(x) for x in q) for q in labels)
            g = NonlocalGame(
                np.array(obj["predicate"]),
                np.array(obj["eta"], dtype=float),
                tuple(obj["alice_answers"]),
                tuple(obj["bob_answers"]),
                labels,
                obj.get("name", ""),
            )
            if kind == "synchronous":
                require_synchronous(g)
            return g
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed game: {exc}") from exc
    raise ValueError(f"unknown game kind {obj.get('kind')!r}")
