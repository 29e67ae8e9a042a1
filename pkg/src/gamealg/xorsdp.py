"""Vector (level-1) optimization for XOR games and Clifford-operator strategies."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from .games import Strategy, XorGame, maximally_entangled_state

log = logging.getLogger(__name__)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class VectorSolution:
    u: np.ndarray  # (m, r) rows are Alice's unit vectors
    v: np.ndarray  # (n, r) rows are Bob's unit vectors
    bias: float
    c: np.ndarray
    flagged_rows: tuple = ()
    flagged_cols: tuple = ()
    history: list = field(default_factory=list, repr=False)

    @property
    def r(self) -> int:
        return self.u.shape[1]

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "u": self.u.tolist(),
            "v": self.v.tolist(),
            "bias": self.bias,
            "c": self.c.tolist(),
            "flagged_rows": list(self.flagged_rows),
            "flagged_cols": list(self.flagged_cols),
        }

    @classmethod
    def from_json(cls, obj: dict) -> VectorSolution:
        try:
            return cls(
                np.asarray(obj["u"], dtype=float),
                np.asarray(obj["v"], dtype=float),
                float(obj["bias"]),
                np.asarray(obj["c"], dtype=float),
                tuple(obj.get("flagged_rows", ())),
                tuple(obj.get("flagged_cols", ())),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed vector solution: {exc}") from exc


def solution_from_vectors(game: XorGame, u, v) -> VectorSolution:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    g = game.cost
    bias = float(np.sum(g * (u @ v.T)))
    return VectorSolution(u, v, bias, row_biases(g, v))


def row_biases(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    """c_i = ||sum_j g_ij v_j||."""
    return np.linalg.norm(g @ v, axis=1)


def _normalize_rows(w: np.ndarray) -> tuple[np.ndarray, list[int]]:
    out = np.array(w, dtype=float)
    flagged = []
    for k, row in enumerate(out):
        nrm = np.linalg.norm(row)
        if nrm <= 1e-300:
            out[k] = 0.0
            out[k, 0] = 1.0
            flagged.append(k)
        else:
            out[k] = row / nrm
    return out, flagged


def _one_run(g, r, rng, tol, max_iter):
    m, n = g.shape
    v, _ = _normalize_rows(rng.standard_normal((n, r)))
    u, _ = _normalize_rows(g @ v)
    bias = float(np.sum(g * (u @ v.T)))
    hist = [bias]
    for _ in range(max_iter):
        v, fc = _normalize_rows(g.T @ u)
        mid = float(np.sum(g * (u @ v.T)))
        u, fr = _normalize_rows(g @ v)
        new = float(np.sum(g * (u @ v.T)))
        # each half-step maximizes over one side with the other fixed, so bias cannot drop
        if mid < bias - 1e-12 or new < mid - 1e-12:
            raise AssertionError(f"alternating maximization decreased the bias ({bias} -> {mid} -> {new})")
        hist.append(new)
        done = new - bias < tol
        bias = new
        if done:
            break
    return u, v, bias, hist, tuple(fr), tuple(fc)


def optimal_bias(game: XorGame, restarts: int = 32, tol: float = 1e-13, seed: int = 0, max_iter: int = 10000) -> VectorSolution:
    """Best vector strategy found by alternating maximization in dimension m + n."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    g = game.cost
    m, n = g.shape
    r = m + n
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        u, v, bias, hist, fr, fc = _one_run(g, r, rng, tol, max_iter)
        if best is None or bias > best[2] + 1e-15:
            best = (u, v, bias, hist, fr, fc)
    u, v, bias, hist, fr, fc = best
    zero_rows = tuple(i for i in range(m) if not np.any(g[i]))
    zero_cols = tuple(j for j in range(n) if not np.any(g[:, j]))
    if zero_rows or zero_cols:
        log.warning("cost matrix has zero rows %s / columns %s", zero_rows, zero_cols)
    return VectorSolution(u, v, bias, row_biases(g, v), zero_rows or fr, zero_cols or fc, hist)


def classical_bias(game: XorGame) -> float:
    """Brute force over Bob's signs; Alice then answers each row optimally."""
    g = game.cost
    best = -np.inf
    for signs in itertools.product((1.0, -1.0), repeat=g.shape[1]):
        best = max(best, float(np.sum(np.abs(g @ np.array(signs)))))
    return best


def clifford_generators(r: int) -> list[np.ndarray]:
    """r pairwise anticommuting self-adjoint involutions of dimension 2^ceil(r/2).

    gamma_{2k} = X^{(x)k} (x) Z (x) 1..., gamma_{2k+1} = X^{(x)k} (x) Y (x) 1...
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    q = (r + 1) // 2
    out = []
    for idx in range(r):
        k, odd = divmod(idx, 2)
        factors = [PAULI_X] * k + [PAULI_Y if odd else PAULI_Z] + [PAULI_I] * (q - k - 1)
        m = np.ones((1, 1), dtype=complex)
        for f in factors:
            m = np.kron(m, f)
        out.append(m)
    return out


def vector_operator(vec, gammas) -> np.ndarray:
    return sum(float(c) * gm for c, gm in zip(vec, gammas))


def tsirelson_strategy(sol: VectorSolution) -> Strategy:
    """Observables X_j = sum_k v_j[k] gamma_k for Bob, transposed analogues for Alice,
    on the maximally entangled state, so that <Y_i (x) X_j> = <u_i, v_j>."""
    gam = clifford_generators(sol.r)
    d = gam[0].shape[0]
    bob = [vector_operator(vj, gam) for vj in sol.v]
    alice = [vector_operator(ui, gam).T for ui in sol.u]
    return Strategy("observable", alice, bob, maximally_entangled_state(d), canonical=True)
