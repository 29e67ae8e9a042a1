"""Rounding a state-seminorm approximate representation to a little-Frobenius one on a spectral subspace."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import matcore as mc
from . import starpoly as sp

log = logging.getLogger(__name__)

INVOLUTION_TOL = 1e-8
TIE_TOL = 1e-12


def candidate_thresholds(lam) -> list[float]:
    """Distinct squared positive eigenvalues of lam, ascending."""
    layers = mc.threshold_layers(lam)
    if not layers:
        raise ValueError("density factor is zero")
    return sorted(a for a, _, _ in layers)


def _functional_terms(images, pres, p) -> float:
    total = 0.0
    for x in images.values():
        total += mc.frobenius(x @ p - p @ x) ** 2
    d = p.shape[0]
    for r in pres.relations:
        total += mc.frobenius(sp.evaluate(r.poly, images, d) @ p) ** 2
    return total


def joint_defect_functional(images, pres: sp.AlgebraPresentation, p) -> float:
    """(sum_j ||X_j P - P X_j||_F^2 + sum_r ||phi(r) P||_F^2) / tr P."""
    p = mc.as_matrix(p)
    tr = float(np.trace(p).real)
    if tr < 0.5:
        raise ValueError("projection is zero")
    return _functional_terms(images, pres, p) / tr


def averaging_bound(images, pres, lam) -> float:
    """sum_j 2||X_j lam - lam X_j||_F + sum_r ||phi(r)||_rho^2."""
    lm = lam.matrix if isinstance(lam, mc.DensityFactor) else np.asarray(lam)
    d = lm.shape[0]
    total = sum(2 * mc.frobenius(x @ lm - lm @ x) for x in images.values())
    total += sum(mc.frobenius(sp.evaluate(r.poly, images, d) @ lm) ** 2 for r in pres.relations)
    return float(total)


@dataclass
class Breakpoint:
    alpha: float
    width: float
    rank: int
    functional: float
    skipped: bool = False
    reason: str = ""


@dataclass
class RoundingResult:
    P: np.ndarray
    rank: int
    threshold: float
    rounded: dict  # generator -> rank x rank unitary, in the basis ``basis``
    basis: np.ndarray
    f_report: sp.DefectReport
    per_generator_distance: dict
    functional_value: float
    functional_average: float
    averaging_bound: float
    breakpoints: list = field(default_factory=list)

    def rounded_full(self) -> dict:
        """Rounded images as operators on the full space (zero off Im P)."""
        b = self.basis
        return {k: b @ u @ mc.dagger(b) for k, u in self.rounded.items()}

    def to_json(self) -> dict:
        return {
            "P": mc.matrix_to_json(self.P),
            "rank": self.rank,
            "threshold": self.threshold,
            "basis": {"re": self.basis.real.tolist(), "im": self.basis.imag.tolist()},
            "rounded": sp.assignment_to_json(self.rounded),
            "f_report": self.f_report.to_json(),
            "per_generator_distance": self.per_generator_distance,
            "functional_value": self.functional_value,
            "functional_average": self.functional_average,
            "averaging_bound": self.averaging_bound,
            "breakpoints": [vars(b) for b in self.breakpoints],
        }

    @classmethod
    def from_json(cls, obj: dict) -> RoundingResult:
        try:
            basis = np.asarray(obj["basis"]["re"], dtype=float) + 1j * np.asarray(obj["basis"]["im"], dtype=float)
            return cls(
                mc.matrix_from_json(obj["P"]),
                int(obj["rank"]),
                float(obj["threshold"]),
                sp.assignment_from_json(obj["rounded"]),
                basis,
                sp.DefectReport.from_json(obj["f_report"]),
                dict(obj["per_generator_distance"]),
                float(obj["functional_value"]),
                float(obj["functional_average"]),
                float(obj["averaging_bound"]),
                [Breakpoint(**b) for b in obj.get("breakpoints", [])],
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed rounding result: {exc}") from exc


def _check_involutions(images, pres):
    for g in pres.involution_generators:
        x = images[g]
        if mc.involution_residual(x) * np.sqrt(x.shape[0]) > INVOLUTION_TOL:
            raise ValueError(f"generator {g} is not a self-adjoint involution to {INVOLUTION_TOL}")


def round_representation(images, lam, pres: sp.AlgebraPresentation, tol: float = 1e-6) -> RoundingResult:
    """Pick the spectral projection of lam minimizing the joint defect functional and take
    polar parts of the compressed generators there."""
    lam = lam if isinstance(lam, mc.DensityFactor) else mc.density_factor(lam)
    d = sp.assignment_dim(images, pres.generators)
    if lam.dim != d:
        raise ValueError(f"density factor dim {lam.dim} != assignment dim {d}")
    _check_involutions(images, pres)
    layers = mc.threshold_layers(lam)
    if not layers:
        raise ValueError("density factor is zero")

    rows: list[Breakpoint] = []
    num = den = 0.0
    candidates = []
    for alpha, width, p in layers:
        rank = int(round(np.trace(p).real))
        terms = _functional_terms(images, pres, p)
        num += width * terms
        den += width * rank
        row = Breakpoint(alpha, width, rank, terms / rank)
        try:
            polar = {g: mc.unitary_part_on_subspace(images[g], p, tol) for g in pres.generators}
            candidates.append((row, p, polar))
        except mc.SubspaceRoundingError as exc:
            row.skipped, row.reason = True, str(exc)
            log.info("skipping breakpoint alpha=%.6g: %s", alpha, exc)
        rows.append(row)
    average = num / den
    if not candidates:
        raise np.linalg.LinAlgError(
            "subspace rounding ill-conditioned at every breakpoint: "
            + "; ".join(f"alpha={r.alpha:.6g}: {r.reason}" for r in rows)
        )
    best_val = min(r.functional for r, _, _ in candidates)
    tied = [c for c in candidates if c[0].functional <= best_val + TIE_TOL]
    row, p, polar = max(tied, key=lambda c: c[0].rank)

    basis = mc.projection_basis(p)
    rounded = {g: mc.dagger(basis) @ polar[g] @ basis for g in pres.generators}
    f_report = sp.defect(pres, rounded, "f")
    dist = {
        g: mc.frobenius(polar[g] - images[g] @ p) / np.sqrt(row.rank) for g in pres.generators
    }
    return RoundingResult(
        P=p,
        rank=row.rank,
        threshold=row.alpha,
        rounded=rounded,
        basis=basis,
        f_report=f_report,
        per_generator_distance=dist,
        functional_value=row.functional,
        functional_average=average,
        averaging_bound=averaging_bound(images, pres, lam),
        breakpoints=rows,
    )
