"""Numerical verification of the dual optimality characterisation.

A pair (u0, v) certifies minimality of u0 for E(.; f, lam) when

    (i)   v lies in -W pointwise,
    (ii)  div v is bounded,
    (iii) TV_phi(u0) = -<u0, div v>,
    (a)   |div v| <= lam everywhere,
    (b)   div v = +lam on {u0 > f},
    (c)   div v = -lam on {u0 < f}.

All almost-everywhere statements become cellwise residuals with three
exclusion rules, each reported:

* a band |u0 - f| <= band keeps ties out of the {u0 >< f} sets;
* cells within a 2-cell margin of the discrete level-set boundaries of u0
  and f are dropped from (b)/(c) -- one-sided stencils carry O(1) error
  across jumps of u0;
* cells where the forward- and backward-stencil divergences of v disagree
  by more than one spacing are dropped from (a)-(c): a one-sided stencil
  straddling a kink line of a piecewise-smooth field can pair slopes from
  both sides and overshoot the essential supremum by O(1), independent of
  the spacing;
* a 2-cell frame at the window edge is dropped from (a)-(c): certificate
  fields need not decay, and the difference stencils treat the outside as
  zero, which manufactures an O(1/spacing) divergence sheet there (window
  truncation is not part of the continuum statement being checked).

The verdict therefore means "certified at resolution spacing"; the
convergence of the residuals as spacing -> 0 is the actual evidence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .gauge import Gauge
from .grid import (DualField, GridImage, cell_centers, divergence,
                   dual_pairing, forward_divergence, tv_phi)
from .solver import SolveResult, SolverConfig, solve, threshold_binary

__all__ = [
    "CertificateReport",
    "check_certificate",
    "build_circle_certificate",
    "certify_minimizer",
]

FEASIBILITY_TOL = 1e-9
BOUNDARY_MARGIN = 2  # cells


@dataclass
class CertificateReport:
    wulff_violation: float
    div_inf_norm: float
    div_bound_residual: float
    div_residual_above: float
    div_residual_below: float
    tv_pairing_gap: float
    tv_value: float
    tolerance: float
    band: float
    excluded_fraction: float
    conditions: dict = field(default_factory=dict)
    passed: bool = False
    strict_uniqueness_hint: bool | None = None
    note: str = ""

    def residuals(self) -> dict:
        return {
            "wulff_violation": self.wulff_violation,
            "div_bound_residual": self.div_bound_residual,
            "div_residual_above": self.div_residual_above,
            "div_residual_below": self.div_residual_below,
            "tv_pairing_gap": self.tv_pairing_gap,
        }

    def to_json(self) -> dict:
        out = {
            "div_inf_norm": self.div_inf_norm,
            "tv_value": self.tv_value,
            "tolerance": self.tolerance,
            "band": self.band,
            "excluded_fraction": self.excluded_fraction,
            "conditions": self.conditions,
            "passed": self.passed,
            "strict_uniqueness_hint": self.strict_uniqueness_hint,
            "note": self.note,
        }
        out.update(self.residuals())
        return out

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _dilate(mask: np.ndarray, margin: int) -> np.ndarray:
    out = mask.copy()
    for di in range(-margin, margin + 1):
        for dj in range(-margin, margin + 1):
            if di == 0 and dj == 0:
                continue
            shifted = np.zeros_like(mask)
            src = mask[max(-di, 0): mask.shape[0] - max(di, 0),
                       max(-dj, 0): mask.shape[1] - max(dj, 0)]
            shifted[max(di, 0): mask.shape[0] - max(-di, 0),
                    max(dj, 0): mask.shape[1] - max(-dj, 0)] = src
            out |= shifted
    return out


def _jump_cells(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Cells adjacent to a jump of the image (either one-sided difference
    nonzero)."""
    jump = np.zeros(values.shape, dtype=bool)
    dx = np.abs(np.diff(values, axis=1)) > tol
    dy = np.abs(np.diff(values, axis=0)) > tol
    jump[:, :-1] |= dx
    jump[:, 1:] |= dx
    jump[:-1, :] |= dy
    jump[1:, :] |= dy
    return jump


def check_certificate(u0: GridImage, f: GridImage, v: DualField, lam: float,
                      g: Gauge, tol: float | None = None,
                      band: float = 1e-6) -> CertificateReport:
    """Evaluates conditions (i)-(iii), (a)-(c) cellwise and reports every
    residual with the tolerance it was compared against.

    The default tolerance 3 * spacing matches the first-order accuracy of
    the divergence stencils.
    """
    if u0.values.shape != f.values.shape or u0.values.shape != v.values.shape[:2]:
        raise ValueError("u0, f and v must live on the same grid")
    if u0.spacing != f.spacing or u0.spacing != v.spacing:
        raise ValueError("grid spacings do not match")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    spacing = u0.spacing
    if tol is None:
        tol = 3.0 * spacing

    wulff_violation = max(0.0, v.max_dual_value(g) - 1.0)

    div_b = divergence(v).values
    div_f = forward_divergence(v).values
    # agreement of the two one-sided stencils bounds the kink smearing a
    # surviving cell can carry, so included residuals stay O(spacing)
    stencil_ok = np.abs(div_b - div_f) <= spacing
    interior = np.zeros(div_b.shape, dtype=bool)
    m = BOUNDARY_MARGIN
    interior[m:-m, m:-m] = True
    stencil_ok &= interior

    included = div_b[stencil_ok]
    div_inf = float(np.max(np.abs(included))) if included.size else 0.0
    div_bound_residual = max(0.0, div_inf - lam)

    boundary = _dilate(_jump_cells(u0.values) | _jump_cells(f.values),
                       BOUNDARY_MARGIN)
    above = (u0.values - f.values > band) & ~boundary & stencil_ok
    below = (f.values - u0.values > band) & ~boundary & stencil_ok
    res_above = float(np.max(np.abs(div_b[above] - lam))) if above.any() else 0.0
    res_below = float(np.max(np.abs(div_b[below] + lam))) if below.any() else 0.0

    tv = tv_phi(u0, g)
    pairing_gap = tv - dual_pairing(u0, v)
    pairing_tol = tol * max(1.0, tv)

    conditions = {
        "i_wulff_membership": wulff_violation <= FEASIBILITY_TOL,
        "ii_bounded_divergence": bool(np.all(np.isfinite(div_b))),
        "iii_tv_pairing": abs(pairing_gap) <= pairing_tol,
        "a_div_bound": div_bound_residual <= tol,
        "b_div_equals_lambda_above": res_above <= tol,
        "c_div_equals_minus_lambda_below": res_below <= tol,
    }
    report = CertificateReport(
        wulff_violation=wulff_violation,
        div_inf_norm=div_inf,
        div_bound_residual=div_bound_residual,
        div_residual_above=res_above,
        div_residual_below=res_below,
        tv_pairing_gap=pairing_gap,
        tv_value=tv,
        tolerance=tol,
        band=band,
        excluded_fraction=float(1.0 - stencil_ok.mean()),
        conditions=conditions,
        passed=all(conditions.values()),
        note=("cellwise check at resolution spacing; default tolerance "
              "3*spacing from the first-order divergence stencils; kink cells "
              "(one-sided stencils disagreeing by more than one spacing), a "
              "2-cell window frame and a 2-cell margin around level-set "
              "boundaries excluded; pairing gap compared to tol*max(1, TV)"),
    )
    return report


def build_circle_certificate(lam: float, width: int, height: int,
                             spacing: float) -> DualField:
    """Samples the explicit certificate field of the unit-disk example at
    the cell centres.

    The scalar profile is w(x1, x2) = clamp(x1 / s) where |x2| >= 1/sqrt(2)
    and clamp(sqrt(2) x1) elsewhere, with s = 1 / lam, and the field is
    v = (-w(x1, x2), -w(x2, x1)); the clamps keep it inside [-1, 1]^2, the
    minus-Wulff body of the 1-norm.
    """
    if lam < math.sqrt(2.0):
        raise ValueError("the construction needs lambda >= sqrt(2)")
    s = 1.0 / lam
    X, Y = cell_centers(width, height, spacing)

    def w(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        steep = np.clip(a / s, -1.0, 1.0)
        shallow = np.clip(math.sqrt(2.0) * a, -1.0, 1.0)
        return np.where(np.abs(b) >= 1.0 / math.sqrt(2.0), steep, shallow)

    v = np.stack([-w(X, Y), -w(Y, X)], axis=-1)
    return DualField(v, spacing)


def certify_minimizer(f: GridImage, lam: float, g: Gauge,
                      cfg: SolverConfig | None = None,
                      tol: float | None = None
                      ) -> tuple[SolveResult, CertificateReport]:
    """Solves, then feeds the minimiser (thresholded when f is binary) and
    the dual iterate into check_certificate; also flags whether the strict
    divergence bound, hence uniqueness, holds with margin."""
    result = solve(f, lam, g, cfg)
    is_binary = np.all((f.values == 0.0) | (f.values == 1.0))
    u0 = threshold_binary(result) if is_binary else result.u
    report = check_certificate(u0, f, result.p, lam, g, tol=tol)
    report.strict_uniqueness_hint = bool(
        report.div_inf_norm < lam - report.tolerance)
    return result, report
