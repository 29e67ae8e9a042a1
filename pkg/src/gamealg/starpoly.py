"""Noncommutative *-polynomials, finite presentations of the game algebras and defect evaluation."""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import matcore as mc

log = logging.getLogger(__name__)

ADJ = "*"
RELATION_CLASSES = (
    "selfadjoint",
    "involution",
    "idempotent",
    "completeness",
    "orthogonality",
    "constraint",
    "commutation",
    "bias",
)
NORM_KINDS = ("op", "F", "f", "rho")

Word = tuple  # tuple[str, ...]; a letter "x*" is the adjoint of generator "x"


def letter_base(letter: str) -> str:
    return letter[:-1] if letter.endswith(ADJ) else letter


def letter_adjoint(letter: str) -> str:
    return letter[:-1] if letter.endswith(ADJ) else letter + ADJ


class StarPolynomial:
    """Element of the free *-algebra: a finite map from words to complex coefficients.

    Zero coefficients are never stored and terms are kept sorted by (length, word),
    so two equal polynomials have identical ``terms``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, complex] | Iterable[tuple[Word, complex]] = ()):
        acc: dict[Word, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            w = tuple(w)
            acc[w] = acc.get(w, 0) + complex(c)
        self.terms = tuple(
            (w, c) for w, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0])) if c != 0
        )

    @classmethod
    def gen(cls, name: str) -> StarPolynomial:
        if name.endswith(ADJ):
            raise ValueError(f"generator names may not end with {ADJ!r}")
        return cls({(name,): 1})

    @classmethod
    def const(cls, c: complex = 1) -> StarPolynomial:
        return cls({(): c})

    @staticmethod
    def _lift(other) -> StarPolynomial:
        if isinstance(other, StarPolynomial):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return StarPolynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return StarPolynomial(list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return StarPolynomial((w, -c) for w, c in self.terms)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return StarPolynomial((w, c * other) for w, c in self.terms)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return StarPolynomial(
            (w1 + w2, c1 * c2) for (w1, c1), (w2, c2) in itertools.product(self.terms, other.terms)
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1 / other)

    def __pow__(self, k: int):
        out = StarPolynomial.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms:
            mono = "".join(w) if w else "1"
            parts.append(f"({c:g})*{mono}" if w else f"({c:g})")
        return " + ".join(parts)

    def adjoint(self) -> StarPolynomial:
        return StarPolynomial(
            (tuple(letter_adjoint(x) for x in reversed(w)), np.conj(c)) for w, c in self.terms
        )

    def letters(self) -> set[str]:
        return {letter_base(x) for w, _ in self.terms for x in w}

    def degree(self) -> int:
        return max((len(w) for w, _ in self.terms), default=0)

    def substitute(self, images: Mapping[str, StarPolynomial]) -> StarPolynomial:
        """Apply the *-homomorphism sending each generator to a polynomial."""
        out = StarPolynomial()
        cache: dict[str, StarPolynomial] = {}
        for w, c in self.terms:
            term = StarPolynomial.const(c)
            for x in w:
                if x not in cache:
                    base = images[letter_base(x)]
                    cache[x] = base.adjoint() if x.endswith(ADJ) else base
                term = term * cache[x]
            out = out + term
        return out

    def to_json(self) -> list:
        return [{"word": list(w), "re": c.real, "im": c.imag} for w, c in self.terms]

    @classmethod
    def from_json(cls, obj) -> StarPolynomial:
        try:
            return cls((tuple(t["word"]), complex(t["re"], t.get("im", 0.0))) for t in obj)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial: {exc}") from exc


def gens(*names: str) -> list[StarPolynomial]:
    return [StarPolynomial.gen(n) for n in names]


def commutator(a: StarPolynomial, b: StarPolynomial) -> StarPolynomial:
    return a * b - b * a


def and_tilde(x: StarPolynomial, y: StarPolynomial) -> StarPolynomial:
    """±1 encoding of AND: (1 + x + y - xy)/2."""
    return (1 + x + y - x * y) * 0.5


@dataclass(frozen=True)
class Relation:
    poly: StarPolynomial
    label: str
    kind: str
    exact: bool = False

    def __post_init__(self):
        if self.kind not in RELATION_CLASSES:
            raise ValueError(f"unknown relation class {self.kind!r}")


@dataclass(frozen=True)
class AlgebraPresentation:
    """Generators plus relation polynomials ``r`` read as ``r = 0``."""

    generators: tuple
    relations: tuple
    involution_generators: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        declared = set(self.generators)
        if len(declared) != len(self.generators):
            raise ValueError("duplicate generator names")
        for r in self.relations:
            extra = r.poly.letters() - declared
            if extra:
                raise ValueError(f"relation {r.label} uses undeclared generators {sorted(extra)}")
        labels = [r.label for r in self.relations]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate relation labels")
        if not set(self.involution_generators) <= declared:
            raise ValueError("involution flags reference undeclared generators")

    def count(self, kind: str) -> int:
        return sum(1 for r in self.relations if r.kind == kind)

    def relation(self, label: str) -> Relation:
        for r in self.relations:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": list(self.generators),
            "involution_generators": sorted(self.involution_generators),
            "relations": [
                {"label": r.label, "class": r.kind, "exact": r.exact, "terms": r.poly.to_json()}
                for r in self.relations
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> AlgebraPresentation:
        try:
            rels = tuple(
                Relation(StarPolynomial.from_json(r["terms"]), r["label"], r["class"], r.get("exact", False))
                for r in obj["relations"]
            )
            return cls(
                tuple(obj["generators"]),
                rels,
                frozenset(obj.get("involution_generators", ())),
                obj.get("name", ""),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed presentation: {exc}") from exc


# --- matrix assignments ------------------------------------------------------------------


def assignment_dim(images: Mapping[str, np.ndarray], generators: Iterable[str] = ()) -> int:
    """Check that all images are square and share one dimension; return it."""
    missing = [g for g in generators if g not in images]
    if missing:
        raise KeyError(f"unassigned generators: {missing}")
    dims = {np.shape(m) for m in images.values()}
    if len(dims) != 1:
        raise ValueError(f"images have mixed shapes {sorted(dims)}")
    (shape,) = dims
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"images must be square, got {shape}")
    return shape[0]


def evaluate(p: StarPolynomial, images: Mapping[str, np.ndarray], dim: int | None = None) -> np.ndarray:
    """Evaluate ``p`` homomorphically: adjoint letters go to conjugate transposes, 1 to identity."""
    if dim is None:
        dim = assignment_dim(images) if images else 1
    out = np.zeros((dim, dim), dtype=complex)
    adj: dict[str, np.ndarray] = {}
    for w, c in p.terms:
        m = mc.identity(dim)
        for x in w:
            base = letter_base(x)
            if base not in images:
                raise KeyError(f"unassigned generator {base!r}")
            if x.endswith(ADJ):
                if base not in adj:
                    adj[base] = mc.dagger(np.asarray(images[base], dtype=complex))
                m = m @ adj[base]
            else:
                m = m @ images[base]
        out += c * m
    return out


@dataclass
class DefectReport:
    norm_kind: str
    per_relation: dict
    max_defect: float
    atp_defect: float | None = None

    def by_class(self, pres: AlgebraPresentation) -> dict:
        out: dict[str, float] = {}
        for r in pres.relations:
            out[r.kind] = max(out.get(r.kind, 0.0), self.per_relation[r.label])
        return out

    def to_json(self) -> dict:
        return {
            "norm_kind": self.norm_kind,
            "per_relation": self.per_relation,
            "max_defect": self.max_defect,
            "atp_defect": self.atp_defect,
        }

    @classmethod
    def from_json(cls, obj: dict) -> DefectReport:
        return cls(obj["norm_kind"], dict(obj["per_relation"]), obj["max_defect"], obj.get("atp_defect"))


def matrix_norm(a: np.ndarray, norm_kind: str, lam=None) -> float:
    if norm_kind == "op":
        return mc.op_norm(a)
    if norm_kind == "F":
        return mc.frobenius(a)
    if norm_kind == "f":
        return mc.little_frobenius(a)
    if norm_kind == "rho":
        if lam is None:
            raise ValueError("rho norm requires a density factor")
        return mc.rho_seminorm(a, lam)
    raise ValueError(f"unknown norm kind {norm_kind!r}")


def defect(pres: AlgebraPresentation, images: Mapping[str, np.ndarray], norm_kind: str = "f", lam=None) -> DefectReport:
    if norm_kind == "rho" and lam is None:
        raise ValueError("rho norm requires a density factor")
    dim = assignment_dim(images, pres.generators)
    if lam is not None:
        lm = lam.matrix if isinstance(lam, mc.DensityFactor) else np.asarray(lam)
        if lm.shape != (dim, dim):
            raise ValueError(f"density factor has shape {lm.shape}, assignment has dim {dim}")
    per = {r.label: matrix_norm(evaluate(r.poly, images, dim), norm_kind, lam) for r in pres.relations}
    return DefectReport(norm_kind, per, max(per.values(), default=0.0))


@dataclass
class Replacement:
    report: DefectReport
    distances: dict


def replace_and_recheck(pres, images, replacement, norm_kind: str = "f", lam=None) -> Replacement:
    """Defect of ``replacement`` together with the per-generator f-distances to ``images``."""
    d1 = assignment_dim(images, pres.generators)
    d2 = assignment_dim(replacement, pres.generators)
    if d1 != d2:
        raise ValueError(f"dimension mismatch {d1} vs {d2}")
    dist = {g: mc.little_frobenius(np.asarray(images[g]) - np.asarray(replacement[g])) for g in pres.generators}
    return Replacement(defect(pres, replacement, norm_kind, lam), dist)


# --- presentations ------------------------------------------------------------------------


def p_name(i, a) -> str:
    return f"p[{i},{a}]"


def z_name(i, a) -> str:
    return f"z[{i},{a}]"


def x_name(j) -> str:
    return f"x[{j}]"


def s_name(j) -> str:
    return f"s[{j}]"


def _unitarity(names, exact=False) -> list[Relation]:
    rels = []
    for n in names:
        x = StarPolynomial.gen(n)
        rels.append(Relation(x - x.adjoint(), f"sa[{n}]", "selfadjoint", exact))
    for n in names:
        x = StarPolynomial.gen(n)
        rels.append(Relation(x * x - 1, f"inv[{n}]", "involution", exact))
    return rels


def synchronous_algebra(game) -> AlgebraPresentation:
    from .games import require_synchronous

    require_synchronous(game)
    n_q, n_a = game.n_questions, game.n_answers
    names = [p_name(i, a) for i in range(n_q) for a in range(n_a)]
    rels: list[Relation] = []
    for i in range(n_q):
        for a in range(n_a):
            p = StarPolynomial.gen(p_name(i, a))
            rels.append(Relation(p * p - p, f"idem[{p_name(i, a)}]", "idempotent"))
    for i in range(n_q):
        for a in range(n_a):
            p = StarPolynomial.gen(p_name(i, a))
            rels.append(Relation(p - p.adjoint(), f"sa[{p_name(i, a)}]", "selfadjoint"))
    for i in range(n_q):
        total = sum((StarPolynomial.gen(p_name(i, a)) for a in range(n_a)), StarPolynomial())
        rels.append(Relation(total - 1, f"complete[{i}]", "completeness"))
    for i, a, j, b in game.losing_tuples():
        pa, pb = StarPolynomial.gen(p_name(i, a)), StarPolynomial.gen(p_name(j, b))
        rels.append(Relation(pa * pb, f"orth[{i},{a};{j},{b}]", "orthogonality"))
    return AlgebraPresentation(tuple(names), tuple(rels), frozenset(), "synchronous")


def synchbcs_algebra(game) -> AlgebraPresentation:
    from .games import require_synchronous

    require_synchronous(game)
    n_q, n_a = game.n_questions, game.n_answers
    names = [z_name(i, a) for i in range(n_q) for a in range(n_a)]
    rels = _unitarity(names)
    for i, a, j, b in game.losing_pairs():
        za, zb = StarPolynomial.gen(z_name(i, a)), StarPolynomial.gen(z_name(j, b))
        rels.append(Relation(and_tilde(za, zb) - 1, f"and[{i},{a};{j},{b}]", "constraint"))
    for i in range(n_q):
        prod = StarPolynomial.const(1)
        for a in range(n_a):
            prod = prod * StarPolynomial.gen(z_name(i, a))
        rels.append(Relation(prod + 1, f"prod[{i}]", "constraint"))
    for i in range(n_q):
        for a, b in itertools.combinations(range(n_a), 2):
            za, zb = StarPolynomial.gen(z_name(i, a)), StarPolynomial.gen(z_name(i, b))
            rels.append(Relation(commutator(za, zb), f"comm[{z_name(i, a)},{z_name(i, b)}]", "commutation"))
    return AlgebraPresentation(tuple(names), tuple(rels), frozenset(names), "synchbcs")


def constraint_polynomial(scope, coefficients: Mapping[tuple, float]) -> StarPolynomial:
    """Multilinear polynomial sum_alpha f_alpha prod_{k in alpha} x[scope[k]] in scope order."""
    out = StarPolynomial()
    for alpha, c in coefficients.items():
        out = out + StarPolynomial({tuple(x_name(scope[k]) for k in alpha): c})
    return out


def bcs_algebra(bcs) -> AlgebraPresentation:
    from .games import fourier_polynomial

    names = [x_name(j) for j in range(bcs.n)]
    rels = _unitarity(names)
    for idx, con in enumerate(bcs.constraints):
        if len(con.scope) == 0:
            raise ValueError(f"constraint {idx} has an empty scope")
        f = constraint_polynomial(con.scope, fourier_polynomial(con.table))
        rels.append(Relation(f + 1, f"constraint[{idx}]", "constraint"))
    for idx, con in enumerate(bcs.constraints):
        for j, k in itertools.combinations(con.scope, 2):
            label = f"comm[{idx}:{x_name(j)},{x_name(k)}]"
            xj, xk = StarPolynomial.gen(x_name(j)), StarPolynomial.gen(x_name(k))
            rels.append(Relation(commutator(xj, xk), label, "commutation"))
    return AlgebraPresentation(tuple(names), tuple(rels), frozenset(names), "bcs")


def xor_solution_algebra(game, c) -> AlgebraPresentation:
    c = np.asarray(c, dtype=float)
    g = game.cost
    if c.shape != (g.shape[0],):
        raise ValueError(f"expected {g.shape[0]} row biases, got shape {c.shape}")
    if np.any(c < 0):
        raise ValueError("row biases must be nonnegative")
    names = [s_name(j) for j in range(g.shape[1])]
    rels = _unitarity(names)
    for i in range(g.shape[0]):
        if c[i] == 0:
            warnings.warn(f"row {i} has zero marginal bias; its relation is omitted", stacklevel=2)
            continue
        lin = StarPolynomial({(s_name(j),): g[i, j] for j in range(g.shape[1])})
        rels.append(Relation(lin * lin - c[i] ** 2, f"bias[{i}]", "bias"))
    return AlgebraPresentation(tuple(names), tuple(rels), frozenset(names), "xor")


# --- synchronous <-> SynchBCS -------------------------------------------------------------


def _parse_pair(name: str) -> tuple[str, str]:
    head, rest = name.split("[", 1)
    return head, rest


def synch_to_synchbcs_map(game) -> dict:
    """Generator images p -> (1 - z)/2, as polynomials in the z generators."""
    return {
        p_name(i, a): (1 - StarPolynomial.gen(z_name(i, a))) * 0.5
        for i in range(game.n_questions)
        for a in range(game.n_answers)
    }


def synchbcs_to_synch_map(game) -> dict:
    """Generator images z -> 1 - 2p."""
    return {
        z_name(i, a): 1 - StarPolynomial.gen(p_name(i, a)) * 2
        for i in range(game.n_questions)
        for a in range(game.n_answers)
    }


def symbolic_iso_residual(game) -> int:
    """Number of generators on which either composite of the two maps fails to be the identity."""
    fwd, bwd = synch_to_synchbcs_map(game), synchbcs_to_synch_map(game)
    bad = 0
    for p, img in fwd.items():
        bad += bool(img.substitute(bwd) - StarPolynomial.gen(p))
    for z, img in bwd.items():
        bad += bool(img.substitute(fwd) - StarPolynomial.gen(z))
    return bad


def _rename(images: Mapping[str, np.ndarray], src: str, dst: str, fn) -> dict:
    out = {}
    for name, m in images.items():
        head, rest = _parse_pair(name)
        if head != src:
            raise ValueError(f"generator {name!r} is not a {src}-generator")
        out[f"{dst}[{rest}"] = fn(np.asarray(m, dtype=complex))
    return out


def synch_from_synchbcs(images: Mapping[str, np.ndarray]) -> dict:
    """Image-wise p = (1 - z)/2."""
    d = assignment_dim(images)
    one = mc.identity(d)
    return _rename(images, "z", "p", lambda z: (one - z) / 2)


def synchbcs_from_synch(images: Mapping[str, np.ndarray]) -> dict:
    """Image-wise z = 1 - 2p."""
    d = assignment_dim(images)
    one = mc.identity(d)
    return _rename(images, "p", "z", lambda p: one - 2 * p)


def assignment_to_json(images: Mapping[str, np.ndarray]) -> dict:
    d = assignment_dim(images) if images else 0
    return {"dim": d, "images": {k: mc.matrix_to_json(v) for k, v in images.items()}}


def assignment_from_json(obj: dict) -> dict:
    try:
        images = {k: mc.matrix_from_json(v) for k, v in obj["images"].items()}
    except (KeyError, AttributeError, TypeError) as exc:
        raise ValueError(f"malformed assignment: {exc}") from exc
    if images and assignment_dim(images) != obj.get("dim", assignment_dim(images)):
        raise ValueError("assignment dim does not match its images")
    return images
