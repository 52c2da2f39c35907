"""One bivariate generalized exponential component BVGE(a1, a2, a3, lam).

Latent construction: X1 = max(U1, U3), X2 = max(U2, U3) with independent
U_k ~ GE(a_k, lam).  The shared U3 puts positive mass a3/(a1+a2+a3) exactly
on the diagonal x1 = x2, so densities live in two channels: planar
(Lebesgue on each open triangle) and diagonal (1-D Lebesgue on x1 = x2).
The two channels are never summed; a Region tag says which one applies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ge import GEParams, ge_cdf, ge_logpdf, ge_quantile, ge_sample

__all__ = [
    "Region",
    "REGION_LABELS",
    "BVGEParams",
    "BVGEPair",
    "classify_region",
    "classify_regions",
    "bvge_sample",
    "bvge_sample_arrays",
    "bvge_logdensity",
    "bvge_density",
    "bvge_cdf",
    "bvge_survival",
    "singular_mass",
]


class Region(enum.Enum):
    DIAGONAL = "diag"
    LOWER = "lower"   # x1 < x2
    UPPER = "upper"   # x1 > x2

    @property
    def code(self) -> int:
        return _REGION_CODE[self]


_REGION_CODE = {Region.DIAGONAL: 0, Region.LOWER: 1, Region.UPPER: 2}
REGION_LABELS = {0: "diag", 1: "lower", 2: "upper"}


@dataclass(frozen=True)
class BVGEParams:
    """Three shapes and the common rate of one component."""

    alpha1: float
    alpha2: float
    alpha3: float
    lam: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3", "lam"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def alpha_sum(self) -> float:
        return self.alpha1 + self.alpha2 + self.alpha3

    def marginal1(self) -> GEParams:
        """X1 ~ GE(alpha1 + alpha3, lam): CDFs of independent maxima multiply."""
        return GEParams(self.alpha1 + self.alpha3, self.lam)

    def marginal2(self) -> GEParams:
        return GEParams(self.alpha2 + self.alpha3, self.lam)

    def shapes(self) -> tuple[float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


@dataclass(frozen=True)
class BVGEPair:
    x1: float
    x2: float
    region: Region


def classify_region(x1: float, x2: float, tie_tol: float = 0.0) -> Region:
    """Region of one observation; tie_tol = 0 means exact float equality.

    For external data a relative tolerance |x1-x2| <= tie_tol*max(1, |x1|)
    may be configured; the sampler itself produces bit-identical ties.
    """
    if tie_tol > 0.0:
        if abs(x1 - x2) <= tie_tol * max(1.0, abs(x1)):
            return Region.DIAGONAL
    elif x1 == x2:
        return Region.DIAGONAL
    return Region.LOWER if x1 < x2 else Region.UPPER


def classify_regions(x1, x2, tie_tol: float = 0.0) -> np.ndarray:
    """Vectorized region codes (0 diag, 1 lower, 2 upper)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if tie_tol > 0.0:
        tie = np.abs(x1 - x2) <= tie_tol * np.maximum(1.0, np.abs(x1))
    else:
        tie = x1 == x2
    return np.where(tie, 0, np.where(x1 < x2, 1, 2)).astype(np.int8)


def bvge_sample_arrays(params: BVGEParams, n: int, rng: np.random.Generator):
    """n draws via the latent maxima; returns (x1, x2, region codes)."""
    u1 = ge_sample(GEParams(params.alpha1, params.lam), rng, n)
    u2 = ge_sample(GEParams(params.alpha2, params.lam), rng, n)
    u3 = ge_sample(GEParams(params.alpha3, params.lam), rng, n)
    x1 = np.maximum(u1, u3)
    x2 = np.maximum(u2, u3)
    return x1, x2, classify_regions(x1, x2)


def bvge_sample(params: BVGEParams, rng: np.random.Generator) -> BVGEPair:
    x1, x2, codes = bvge_sample_arrays(params, 1, rng)
    return BVGEPair(float(x1[0]), float(x2[0]), _region_from_code(int(codes[0])))


def _region_from_code(code: int) -> Region:
    return (Region.DIAGONAL, Region.LOWER, Region.UPPER)[code]


def _logpdf_lower(params: BVGEParams, x1, x2):
    return ge_logpdf(params.marginal1(), x1) + ge_logpdf(
        GEParams(params.alpha2, params.lam), x2
    )


def _logpdf_upper(params: BVGEParams, x1, x2):
    # symmetric counterpart of the lower branch, from the CDF factorization
    # F_GE(x1; a1) * F_GE(x2; a2 + a3)
    return ge_logpdf(GEParams(params.alpha1, params.lam), x1) + ge_logpdf(
        params.marginal2(), x2
    )


def _logpdf_diag(params: BVGEParams, x):
    return np.log(params.alpha3 / params.alpha_sum) + ge_logpdf(
        GEParams(params.alpha_sum, params.lam), x
    )


def bvge_logdensity(params: BVGEParams, x1, x2, region) -> np.ndarray | float:
    """Log density in the channel selected by `region` (codes or Region).

    Lower: f_GE(x1; a1+a3) * f_GE(x2; a2).  Upper: f_GE(x1; a1) *
    f_GE(x2; a2+a3).  Diagonal: (a3/(a1+a2+a3)) * f_GE(x; a1+a2+a3), a
    density with respect to 1-D measure on the diagonal, evaluated at x = x1.
    """
    if isinstance(region, Region):
        region = region.code
    codes = np.asarray(region)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if codes.ndim == 0:
        # one region for the whole input; x1/x2 may still be arrays
        code = int(codes)
        if code == 0:
            out = _logpdf_diag(params, x1)
        elif code == 1:
            out = _logpdf_lower(params, x1, x2)
        else:
            out = _logpdf_upper(params, x1, x2)
        out = np.asarray(out)
        return out if out.ndim else float(out)
    out = np.empty(codes.shape, dtype=float)
    diag, low, up = codes == 0, codes == 1, codes == 2
    out[diag] = _logpdf_diag(params, x1[diag])
    out[low] = _logpdf_lower(params, x1[low], x2[low])
    out[up] = _logpdf_upper(params, x1[up], x2[up])
    return out


def bvge_density(params: BVGEParams, pair: BVGEPair) -> float:
    return float(np.exp(bvge_logdensity(params, pair.x1, pair.x2, pair.region)))


def bvge_cdf(params: BVGEParams, x1, x2) -> np.ndarray | float:
    """Joint CDF; continuous across x1 = x2 where it equals ge_cdf(a1+a2+a3)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    lower = ge_cdf(params.marginal1(), x1) * ge_cdf(
        GEParams(params.alpha2, params.lam), x2
    )
    upper = ge_cdf(GEParams(params.alpha1, params.lam), x1) * ge_cdf(
        params.marginal2(), x2
    )
    out = np.where(np.asarray(x1) <= np.asarray(x2), lower, upper)
    return out if getattr(out, "ndim", 0) else float(out)


def bvge_survival(params: BVGEParams, t1, t2) -> np.ndarray | float:
    """P(X1 > t1, X2 > t2) by inclusion-exclusion over the GE marginals."""
    f1 = ge_cdf(params.marginal1(), t1)
    f2 = ge_cdf(params.marginal2(), t2)
    out = 1.0 - np.asarray(f1) - np.asarray(f2) + np.asarray(bvge_cdf(params, t1, t2))
    out = np.maximum(out, 0.0)  # guard rounding at the far corner
    return out if out.ndim else float(out)


def singular_mass(params: BVGEParams) -> float:
    """P(X1 = X2) = a3 / (a1 + a2 + a3)."""
    return params.alpha3 / params.alpha_sum


def bvge_quantile_marginal1(params: BVGEParams, q):
    return ge_quantile(params.marginal1(), q)


def bvge_quantile_marginal2(params: BVGEParams, q):
    return ge_quantile(params.marginal2(), q)
