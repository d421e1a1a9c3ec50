"""Multi-source coincidence prediction and the P1 / g2 trade-off search.

``coincidence_rate`` scales a source's single-photon probability to the
M-fold coincidence rate C_M = P1^M R of M synchronized copies.  The
comparison table combines static literature figures (shipped as a data file)
with rows recomputed live from the simulation engine.  The optimizer scans
(mu, n_bins) for the largest analytic P1 whose estimator-level g2 stays
under a cap, mirroring the trade-off between brightness and multi-photon
noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .mux import ExperimentConfig, SimResult, analyze


class PredictorError(ValueError):
    """Raised for invalid prediction parameters."""


@dataclass(frozen=True)
class SourceFigures:
    """One comparison-table row."""

    label: str
    method: str
    r_hz: float
    p_1: float
    g2: float
    indistinguishability: float

    def __post_init__(self):
        if not 0.0 <= self.p_1 <= 1.0:
            raise PredictorError(f"p_1 must lie in [0, 1], got {self.p_1}")
        if self.r_hz <= 0:
            raise PredictorError(f"r_hz must be > 0, got {self.r_hz}")


@dataclass(frozen=True)
class OptimizeResult:
    feasible: bool
    mu: float | None
    n_bins: int | None
    p_1: float | None
    g2: float | None
    frontier: tuple


def coincidence_rate(p_1: float, r_hz: float, m: int) -> float:
    """Predicted M-fold coincidence rate C_M = P1^M R (per second)."""
    if m < 1:
        raise PredictorError(f"m must be >= 1, got {m}")
    if not 0.0 <= p_1 <= 1.0:
        raise PredictorError(f"p_1 must lie in [0, 1], got {p_1}")
    if r_hz < 0:
        raise PredictorError(f"r_hz must be >= 0, got {r_hz}")
    return p_1 ** m * r_hz


def load_reference_sources() -> list[SourceFigures]:
    """Literature rows of the comparison table (static data file)."""
    text = resources.files("photon_mux.data").joinpath(
        "comparison_sources.json"
    ).read_text()
    rows = json.loads(text)
    return [SourceFigures(**row) for row in rows]


def this_work_figures(cfg: ExperimentConfig, indistinguishability: float = 0.91,
                      label: str = "this_work") -> SourceFigures:
    """Live row for the simulated multiplexed source."""
    res = analyze(cfg)
    return SourceFigures(
        label=label,
        method="mux_hsps",
        r_hz=cfg.rep_rate_hz,
        p_1=res.p_1,
        g2=res.g2_est,
        indistinguishability=indistinguishability,
    )


def build_comparison_table(
    rows: list[SourceFigures], folds: list[int]
) -> list[dict]:
    """Attach C_m columns to each source row."""
    if not rows:
        raise PredictorError("need at least one source row")
    table = []
    for row in rows:
        entry = {
            "label": row.label,
            "method": row.method,
            "r_hz": row.r_hz,
            "p_1": row.p_1,
            "g2": row.g2,
            "indistinguishability": row.indistinguishability,
        }
        for m in folds:
            entry[f"c_{m}_hz"] = coincidence_rate(row.p_1, row.r_hz, m)
        table.append(entry)
    return table


def _evaluate(template: ExperimentConfig, mu: float, n: int) -> SimResult:
    return analyze(replace(template, mu=mu, n_bins=n, k_max=None))


def optimize_mu_n(
    template: ExperimentConfig,
    g2_max: float,
    n_max: int,
    mu_bounds: tuple[float, float] = (1e-4, 1.0),
    coarse_mu_points: int = 50,
    refine_iterations: int = 40,
) -> OptimizeResult:
    """Maximise analytic P1 over (mu, n_bins) subject to g2 <= g2_max.

    Deterministic: a coarse log-spaced grid (50 mu values x every n up to
    ``n_max``) followed by bisection of the feasibility boundary in mu at
    the best n.  Both P1 and the estimator g2 grow with mu, so the best
    feasible mu at fixed n sits on the boundary.  Ties break toward smaller
    mu.  Returns an explicit infeasibility result when even the smallest mu
    violates the cap.
    """
    if g2_max <= 0:
        raise PredictorError(f"g2_max must be > 0, got {g2_max}")
    if n_max < 1:
        raise PredictorError(f"n_max must be >= 1, got {n_max}")
    mus = np.geomspace(mu_bounds[0], mu_bounds[1], coarse_mu_points)
    ns = range(1, n_max + 1)
    frontier = []
    best = None  # (p_1, mu, n, g2)
    for n in ns:
        best_for_n = None
        for mu in mus:
            res = _evaluate(template, float(mu), n)
            g2 = res.g2_est
            if not np.isnan(g2) and g2 <= g2_max:
                if best_for_n is None or res.p_1 > best_for_n[0]:
                    best_for_n = (res.p_1, float(mu), n, g2)
        if best_for_n is not None:
            frontier.append(best_for_n)
            if (
                best is None
                or best_for_n[0] > best[0] + 1e-15
                or (abs(best_for_n[0] - best[0]) <= 1e-15 and best_for_n[1] < best[1])
            ):
                best = best_for_n
    if best is None:
        return OptimizeResult(False, None, None, None, None, ())

    p1_b, mu_b, n_b, g2_b = best
    # walk the feasibility boundary in mu at the winning n
    lo = mu_b
    hi = mu_bounds[1]
    res_hi = _evaluate(template, hi, n_b)
    if not np.isnan(res_hi.g2_est) and res_hi.g2_est <= g2_max:
        lo = hi
    else:
        for _ in range(refine_iterations):
            mid = math.sqrt(lo * hi)
            res_mid = _evaluate(template, mid, n_b)
            if not np.isnan(res_mid.g2_est) and res_mid.g2_est <= g2_max:
                lo = mid
            else:
                hi = mid
    final = _evaluate(template, lo, n_b)
    return OptimizeResult(
        feasible=True,
        mu=lo,
        n_bins=n_b,
        p_1=final.p_1,
        g2=final.g2_est,
        frontier=tuple(frontier),
    )
