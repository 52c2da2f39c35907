"""Two-component mixture of BVGE distributions (9 parameters).

Component 0 carries weight p; labels follow that convention everywhere
(label 0 <=> drawn from comp0).  Densities keep the planar / diagonal
channel split of the components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .bvge import (
    BVGEPair,
    BVGEParams,
    Region,
    bvge_cdf,
    bvge_logdensity,
    bvge_survival,
    classify_regions,
    singular_mass,
)
from .ge import GEParams, ge_cdf, ge_pdf, ge_quantile

__all__ = [
    "MixtureParams",
    "LabeledPair",
    "PARAM_NAMES",
    "params_to_vector",
    "vector_to_params",
    "mix_sample",
    "mix_sample_arrays",
    "mix_logdensity",
    "mix_density",
    "mix_cdf",
    "mix_survival",
    "marginal_cdf",
    "marginal_pdf",
    "marginal_quantile",
    "mix_loglik",
    "mix_singular_mass",
    "planar_rect_prob",
    "diag_interval_prob",
]

PARAM_NAMES = ("p", "a1", "a2", "a3", "l1", "b1", "b2", "b3", "l2")


@dataclass(frozen=True)
class MixtureParams:
    """Mixture weight p in (0,1) plus the two component parameter sets."""

    p: float
    comp0: BVGEParams
    comp1: BVGEParams

    def __post_init__(self):
        p = float(self.p)
        if not np.isfinite(p) or not 0.0 < p < 1.0:
            raise ValueError(f"p must lie in (0,1), got {p!r}")
        object.__setattr__(self, "p", p)

    def swapped(self) -> "MixtureParams":
        return MixtureParams(1.0 - self.p, self.comp1, self.comp0)


@dataclass(frozen=True)
class LabeledPair:
    pair: BVGEPair
    label: int  # 0 <=> comp0


def params_to_vector(params: MixtureParams) -> np.ndarray:
    c0, c1 = params.comp0, params.comp1
    return np.array(
        [params.p, c0.alpha1, c0.alpha2, c0.alpha3, c0.lam,
         c1.alpha1, c1.alpha2, c1.alpha3, c1.lam]
    )


def vector_to_params(vec) -> MixtureParams:
    v = np.asarray(vec, dtype=float)
    if v.shape != (9,):
        raise ValueError(f"expected 9 parameters {PARAM_NAMES}, got shape {v.shape}")
    return MixtureParams(v[0], BVGEParams(v[1], v[2], v[3], v[4]),
                         BVGEParams(v[5], v[6], v[7], v[8]))


def mix_sample_arrays(params: MixtureParams, n: int, rng: np.random.Generator):
    """n labelled draws; returns (x1, x2, region codes, labels).

    Draw order is fixed (labels, then the three latent uniforms) so a seeded
    rng reproduces the exact sequence.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = (rng.random(n) >= params.p).astype(np.int8)
    u = rng.random((3, n))
    u = np.maximum(u, np.finfo(float).tiny)
    x1 = np.empty(n)
    x2 = np.empty(n)
    for label, comp in ((0, params.comp0), (1, params.comp1)):
        idx = labels == label
        if not np.any(idx):
            continue
        v1 = ge_quantile(GEParams(comp.alpha1, comp.lam), u[0, idx])
        v2 = ge_quantile(GEParams(comp.alpha2, comp.lam), u[1, idx])
        v3 = ge_quantile(GEParams(comp.alpha3, comp.lam), u[2, idx])
        x1[idx] = np.maximum(v1, v3)
        x2[idx] = np.maximum(v2, v3)
    return x1, x2, classify_regions(x1, x2), labels


def mix_sample(params: MixtureParams, n: int, rng: np.random.Generator) -> list[LabeledPair]:
    x1, x2, codes, labels = mix_sample_arrays(params, n, rng)
    regions = (Region.DIAGONAL, Region.LOWER, Region.UPPER)
    return [
        LabeledPair(BVGEPair(float(a), float(b), regions[int(c)]), int(z))
        for a, b, c, z in zip(x1, x2, codes, labels)
    ]


def component_logdensities(params: MixtureParams, x1, x2, region):
    """(log f_comp0, log f_comp1) in the requested channel."""
    return (
        bvge_logdensity(params.comp0, x1, x2, region),
        bvge_logdensity(params.comp1, x1, x2, region),
    )


def mix_logdensity(params: MixtureParams, x1, x2, region) -> np.ndarray | float:
    """log(p*f0 + (1-p)*f1) via log-sum-exp, channel chosen by `region`."""
    l0, l1 = component_logdensities(params, x1, x2, region)
    stacked = np.stack([np.asarray(l0, dtype=float), np.asarray(l1, dtype=float)])
    with np.errstate(divide="ignore"):
        out = logsumexp(
            stacked, axis=0, b=np.array([[params.p], [1.0 - params.p]]).reshape(2, *([1] * (stacked.ndim - 1)))
        )
    return out if getattr(out, "ndim", 0) else float(out)


def mix_density(params: MixtureParams, pair: BVGEPair) -> float:
    return float(np.exp(mix_logdensity(params, pair.x1, pair.x2, pair.region)))


def mix_cdf(params: MixtureParams, x1, x2) -> np.ndarray | float:
    out = params.p * np.asarray(bvge_cdf(params.comp0, x1, x2)) + (
        1.0 - params.p
    ) * np.asarray(bvge_cdf(params.comp1, x1, x2))
    return out if out.ndim else float(out)


def mix_survival(params: MixtureParams, t1, t2) -> np.ndarray | float:
    out = params.p * np.asarray(bvge_survival(params.comp0, t1, t2)) + (
        1.0 - params.p
    ) * np.asarray(bvge_survival(params.comp1, t1, t2))
    return out if out.ndim else float(out)


def _marginal_ge(params: MixtureParams, coord: int) -> tuple[GEParams, GEParams]:
    if coord == 1:
        return params.comp0.marginal1(), params.comp1.marginal1()
    if coord == 2:
        return params.comp0.marginal2(), params.comp1.marginal2()
    raise ValueError("coord must be 1 or 2")


def marginal_cdf(params: MixtureParams, coord: int, x) -> np.ndarray | float:
    """Mixture of GE CDFs: each coordinate is itself a two-part GE mixture."""
    g0, g1 = _marginal_ge(params, coord)
    out = params.p * np.asarray(ge_cdf(g0, x)) + (1.0 - params.p) * np.asarray(
        ge_cdf(g1, x)
    )
    return out if out.ndim else float(out)


def marginal_pdf(params: MixtureParams, coord: int, x) -> np.ndarray | float:
    g0, g1 = _marginal_ge(params, coord)
    out = params.p * np.asarray(ge_pdf(g0, x)) + (1.0 - params.p) * np.asarray(
        ge_pdf(g1, x)
    )
    return out if out.ndim else float(out)


def marginal_quantile(params: MixtureParams, coord: int, q: float) -> float:
    """Numeric inverse of the mixture marginal CDF (bracketed bisection)."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie strictly in (0, 1)")
    g0, g1 = _marginal_ge(params, coord)
    hi = max(ge_quantile(g0, q), ge_quantile(g1, q))
    lo = min(ge_quantile(g0, q), ge_quantile(g1, q))
    # component quantiles bracket the mixture quantile (CDFs are ordered there)
    if lo == hi:
        return lo
    return brentq(lambda x: marginal_cdf(params, coord, x) - q, lo, hi, xtol=1e-14)


def mix_loglik(params: MixtureParams, x1, x2, region) -> float:
    """Observed-data log-likelihood; diagonal points use the diagonal channel.

    Returns -inf (with a warning naming the offending indices) if any point
    has zero density under both components.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.size == 0:
        raise ValueError("data must be non-empty")
    logs = np.asarray(mix_logdensity(params, x1, x2, region))
    dead = ~np.isfinite(logs)
    if np.any(dead):
        warnings.warn(
            f"{int(dead.sum())} observation(s) have zero density under both "
            f"components (first index {int(np.flatnonzero(dead)[0])}); "
            "log-likelihood is -inf",
            RuntimeWarning,
            stacklevel=2,
        )
        return float("-inf")
    return float(np.sum(logs))


def mix_singular_mass(params: MixtureParams) -> float:
    return params.p * singular_mass(params.comp0) + (1.0 - params.p) * singular_mass(
        params.comp1
    )


def _rect_cdf_mass(params: MixtureParams, x1lo, x1hi, x2lo, x2hi) -> float:
    return float(
        np.asarray(mix_cdf(params, x1hi, x2hi))
        - np.asarray(mix_cdf(params, x1lo, x2hi))
        - np.asarray(mix_cdf(params, x1hi, x2lo))
        + np.asarray(mix_cdf(params, x1lo, x2lo))
    )


def diag_interval_prob(params: MixtureParams, lo: float, hi: float) -> float:
    """Mass of the diagonal channel on {x1 = x2 in (lo, hi]}."""
    if hi <= lo:
        return 0.0
    total = 0.0
    for weight, comp in ((params.p, params.comp0), (1.0 - params.p, params.comp1)):
        g = GEParams(comp.alpha_sum, comp.lam)
        total += weight * singular_mass(comp) * (
            float(np.asarray(ge_cdf(g, hi))) - float(np.asarray(ge_cdf(g, lo)))
        )
    return total


def planar_rect_prob(params: MixtureParams, x1lo, x1hi, x2lo, x2hi) -> float:
    """Off-diagonal mass of a half-open rectangle (x1lo, x1hi] x (x2lo, x2hi].

    Closed form: CDF inclusion-exclusion minus the diagonal-segment mass that
    falls inside the rectangle.  Used as an exact oracle for histogram tests.
    """
    seg_lo = max(x1lo, x2lo)
    seg_hi = min(x1hi, x2hi)
    return _rect_cdf_mass(params, x1lo, x1hi, x2lo, x2hi) - diag_interval_prob(
        params, seg_lo, seg_hi
    )
