"""Dependence structure of the mixture: copulas, tail indices, hazard,
conditional CDF, Kendall's tau and Spearman's rho.

Several printed closed forms for this family violate range constraints
(upper tail index above 1, tau negative for a positively dependent
construction, rho outside [-1, 1]).  Those forms are kept verbatim, clearly
flagged, and every one is shadowed by an independently computed numeric
estimator; only the numeric values are meant for downstream use.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .bvge import BVGEParams, Region, classify_region
from .ge import GEParams, ge_cdf, ge_pdf, ge_quantile
from .mixture import (
    MixtureParams,
    marginal_cdf,
    marginal_quantile,
    mix_cdf,
    mix_logdensity,
    mix_sample_arrays,
    mix_survival,
)

__all__ = [
    "SurvivalUnderflowWarning",
    "ConditionalRangeWarning",
    "TailIndices",
    "DependenceSummary",
    "copula_component",
    "copula_mixture",
    "copula_of_mixture",
    "lower_tail_ratio",
    "tail_indices",
    "kendall_tau",
    "kendall_tau_mc",
    "spearman_rho",
    "spearman_rho_mc",
    "hazard_ratio",
    "hazard_gradient",
    "conditional_cdf",
    "dependence_summary",
    "expected_under_mixture",
]


class SurvivalUnderflowWarning(UserWarning):
    """Hazard requested where the joint survival has underflowed."""


class ConditionalRangeWarning(UserWarning):
    """The printed conditional-CDF form left [0, 1] (known formula defect)."""


# ---------------------------------------------------------------------------
# copulas


def copula_component(comp: BVGEParams, u, v) -> np.ndarray | float:
    """Copula of one BVGE component.

    C(u, v) = u * v**(a2/(a2+a3)) where u**(1/(a1+a3)) <= v**(1/(a2+a3)),
    and u**(a1/(a1+a3)) * v otherwise.  The branch assignment is the one
    forced by the joint CDF (boundary conditions C(u,1)=u, C(1,v)=v hold
    exactly).
    """
    a13 = comp.alpha1 + comp.alpha3
    a23 = comp.alpha2 + comp.alpha3
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    lower_side = u ** (1.0 / a13) <= v ** (1.0 / a23)
    with np.errstate(divide="ignore"):
        out = np.where(
            lower_side,
            u * v ** (comp.alpha2 / a23),
            u ** (comp.alpha1 / a13) * v,
        )
    return out if out.ndim else float(out)


def copula_mixture(params: MixtureParams, u, v) -> np.ndarray | float:
    """p*C1 + (1-p)*C2: the mixture of the component copulas.

    This is the stated dependence object for the family.  It is NOT in
    general the copula of the mixture distribution when the component
    marginals differ; see copula_of_mixture for that interpretation.
    """
    out = params.p * np.asarray(copula_component(params.comp0, u, v)) + (
        1.0 - params.p
    ) * np.asarray(copula_component(params.comp1, u, v))
    return out if out.ndim else float(out)


def copula_of_mixture(params: MixtureParams, u: float, v: float) -> float:
    """Sklar copula of the mixture law: F(F1^{-1}(u), F2^{-1}(v))."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("copula arguments must lie in [0, 1]")
    if u == 0.0 or v == 0.0:
        return 0.0
    if u == 1.0:
        return float(v)
    if v == 1.0:
        return float(u)
    x1 = marginal_quantile(params, 1, u)
    x2 = marginal_quantile(params, 2, v)
    return float(np.asarray(mix_cdf(params, x1, x2)))


def lower_tail_ratio(params: MixtureParams, t: float) -> float:
    """C(t, t) / t for the mixture copula; tends to 0 as t -> 0."""
    return float(np.asarray(copula_mixture(params, t, t))) / t


# ---------------------------------------------------------------------------
# tail indices


@dataclass(frozen=True)
class TailIndices:
    lower: float
    upper_paper: float
    upper_numeric: float
    upper_numeric_raw: float
    upper_out_of_range: bool


def _diag_copula_excess(comp: BVGEParams, s: float) -> float:
    """C(t, t) - 1 of one component copula at t = 1 - s, cancellation-free.

    Near t = 1 the active branch is fixed, where C(t, t) = t**(1 + r); the
    excess is evaluated through expm1/log1p so the numeric limit below keeps
    full precision.
    """
    a13 = comp.alpha1 + comp.alpha3
    a23 = comp.alpha2 + comp.alpha3
    r = comp.alpha2 / a23 if a23 >= a13 else comp.alpha1 / a13
    return float(np.expm1((1.0 + r) * np.log1p(-s)))


def tail_indices(params: MixtureParams) -> TailIndices:
    """Lower and upper tail dependence of the mixture copula.

    lower: the limit of C(t,t)/t, which is 0 for this family.
    upper_paper: the verbatim printed expression
        2 - p*a2/(a1+a2+a3) - (1-p)*b2/(b1+b2+b3)
    (unverified; exceeds 1 for typical parameters).
    upper_numeric: the limit of (1 - 2t + C(t,t))/(1 - t) as t -> 1-,
    extrapolated from t = 1 - 10^-k and clamped to [0, 1].
    """
    c0, c1 = params.comp0, params.comp1
    upper_paper = (
        2.0
        - params.p * c0.alpha2 / c0.alpha_sum
        - (1.0 - params.p) * c1.alpha2 / c1.alpha_sum
    )

    def exceedance_slope(s: float) -> float:
        total = 0.0
        for weight, comp in ((params.p, c0), (1.0 - params.p, c1)):
            total += weight * (_diag_copula_excess(comp, s) + 2.0 * s) / s
        return total

    s_a, s_b = 1e-7, 1e-8
    g_a, g_b = exceedance_slope(s_a), exceedance_slope(s_b)
    raw = g_b - (g_a - g_b) * s_b / (s_a - s_b)  # linear extrapolation to s = 0
    clamped = float(np.clip(raw, 0.0, 1.0))
    return TailIndices(
        lower=0.0,
        upper_paper=float(upper_paper),
        upper_numeric=clamped,
        upper_numeric_raw=float(raw),
        upper_out_of_range=not (0.0 <= raw <= 1.0),
    )


# ---------------------------------------------------------------------------
# expectation engine (deterministic quadrature over the mixture law)

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _unit_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on (0,1) with a cubic map clustering toward 0.

    The map absorbs the integrable x**(shape-1) edge behaviour that appears
    when shapes are below one.
    """
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (x + 1.0)
        wt = 0.5 * w
        _GL_CACHE[n] = (t**3, wt * 3.0 * t**2)
    return _GL_CACHE[n]


def expected_under_bvge(comp: BVGEParams, fn, n_nodes: int = 96) -> float:
    """E[fn(X1, X2)] under one BVGE component.

    The probability-integral transform per region makes each planar integral
    a smooth integral over a subset of the unit square with the region
    boundary t2 = t1**c, plus a one-dimensional diagonal part; fn must
    broadcast over numpy arrays.
    """
    a1, a2, a3, lam = comp.alpha1, comp.alpha2, comp.alpha3, comp.lam
    a13, a23, total_shape = a1 + a3, a2 + a3, a1 + a2 + a3
    t, w = _unit_nodes(n_nodes)

    # lower region: x1 ~ GE(a1+a3), x2 ~ GE(a2), constrained to x1 < x2
    x1 = ge_quantile(GEParams(a13, lam), t)
    lo = t ** (a2 / a13)
    t2 = lo[:, None] + (1.0 - lo)[:, None] * t[None, :]
    x2 = ge_quantile(GEParams(a2, lam), t2)
    lower = float(w @ ((1.0 - lo) * (np.asarray(fn(x1[:, None], x2)) @ w)))

    # upper region: x1 ~ GE(a1), x2 ~ GE(a2+a3), constrained to x2 < x1
    x1u = ge_quantile(GEParams(a1, lam), t)
    hi = t ** (a23 / a1)
    t2u = hi[:, None] * t[None, :]
    x2u = ge_quantile(GEParams(a23, lam), t2u)
    upper = float(w @ (hi * (np.asarray(fn(x1u[:, None], x2u)) @ w)))

    # diagonal channel
    xd = ge_quantile(GEParams(total_shape, lam), t)
    diag = (a3 / total_shape) * float(w @ np.asarray(fn(xd, xd)))
    return lower + upper + diag


def expected_under_mixture(params: MixtureParams, fn, n_nodes: int = 96) -> float:
    """E[fn(X1, X2)] under the mixture law."""
    return params.p * expected_under_bvge(params.comp0, fn, n_nodes) + (
        1.0 - params.p
    ) * expected_under_bvge(params.comp1, fn, n_nodes)


# ---------------------------------------------------------------------------
# Kendall's tau and Spearman's rho


def kendall_tau(params: MixtureParams, n_nodes: int = 96) -> tuple[float, float]:
    """(verbatim printed value, numeric value).

    The numeric value is 4*E[F(X1, X2)] - 1 with (X1, X2) drawn from the
    mixture itself, computed by deterministic quadrature; by Sklar this
    equals 4*E[C(U, V)] - 1 for the copula of the mixture, i.e. the
    population concordance measure that sample estimates converge to.
    """
    c0, c1 = params.comp0, params.comp1
    p = params.p
    a1, a2, a3 = c0.alpha1, c0.alpha2, c0.alpha3
    b1, b2, b3 = c1.alpha1, c1.alpha2, c1.alpha3
    paper = (
        p**2 * (a1 + a2) / (a1 + a2 + a3)
        + (1 - p) ** 2 * (b1 + b2) / (b1 + b2 + b3)
        + 2 * p * (1 - p) * b2 * (a2 + a3)
        / ((2 * b1 + b2 + 2 * b3) * (a2 + a3) + a2 * (b2 + b3))
        + 2 * p * (1 - p) * a2 * (b2 + b3)
        / ((2 * a1 + a2 + 2 * a3) * (b2 + b3) + b2 * (a2 + a3))
        + 2 * p * (1 - p) * b1 * (a1 + a3)
        / (2 * (b1 + b2 + b3) * a1 + (2 * b2 + b1 + b3) * a3)
        + 2 * p * (1 - p) * a1 * (b1 + b3)
        / (2 * (a1 + a2 + a3) * b1 + (2 * a2 + a1 + a3) * b3)
        - 1
    )
    numeric = 4.0 * expected_under_mixture(
        params, lambda x1, x2: mix_cdf(params, x1, x2), n_nodes
    ) - 1.0
    return float(paper), float(numeric)


def kendall_tau_mc(params: MixtureParams, n_pairs: int, rng: np.random.Generator):
    """Concordance estimate over independent pairs of draws (tau-a: ties
    count zero).  Returns (estimate, standard error)."""
    x1a, x2a, _, _ = mix_sample_arrays(params, n_pairs, rng)
    x1b, x2b, _, _ = mix_sample_arrays(params, n_pairs, rng)
    signs = np.sign((x1a - x1b) * (x2a - x2b))
    return float(signs.mean()), float(signs.std(ddof=1) / np.sqrt(n_pairs))


def spearman_rho(params: MixtureParams, n_nodes: int = 96) -> tuple[float, float]:
    """(verbatim printed value, numeric value).

    Numeric: 12*E[F1(X1)*F2(X2)] - 3, the grade correlation of the mixture,
    equal to 12 * integral of its copula minus 3.
    """
    c0, c1 = params.comp0, params.comp1
    p = params.p
    a1, a2, a3 = c0.alpha1, c0.alpha2, c0.alpha3
    b1, b2, b3 = c1.alpha1, c1.alpha2, c1.alpha3
    paper = (
        6 * p * (a1 + a2) / (2 * (a1 + a2 + a3) + a3)
        + 6 * (1 - p) * (b1 + b2) / (2 * (b1 + b2 + b3) + b3)
        - 3
    )
    numeric = 12.0 * expected_under_mixture(
        params,
        lambda x1, x2: np.asarray(marginal_cdf(params, 1, x1))
        * np.asarray(marginal_cdf(params, 2, x2)),
        n_nodes,
    ) - 3.0
    return float(paper), float(numeric)


def spearman_rho_mc(params: MixtureParams, n: int, rng: np.random.Generator):
    """Sample rank correlation; returns (estimate, ~standard error)."""
    x1, x2, _, _ = mix_sample_arrays(params, n, rng)
    rho = spearmanr(x1, x2).statistic
    return float(rho), 1.0 / np.sqrt(n)


# ---------------------------------------------------------------------------
# hazard and conditional distribution


def hazard_ratio(params: MixtureParams, t1: float, t2: float) -> float:
    """Mixture density over mixture survival, branch chosen by region."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("hazard is defined for t1, t2 > 0")
    region = classify_region(t1, t2)
    num = float(np.exp(mix_logdensity(params, t1, t2, region)))
    den = float(np.asarray(mix_survival(params, t1, t2)))
    if den < 1e-300:
        warnings.warn(
            f"joint survival underflowed at ({t1}, {t2}); hazard reported as inf",
            SurvivalUnderflowWarning,
            stacklevel=2,
        )
        return float("inf")
    return num / den


def _dsurvival(comp: BVGEParams, t1: float, t2: float) -> tuple[float, float]:
    """Partial derivatives of one component's survival function.

    On the diagonal the lower-branch (x1 <= x2) expressions are used.
    """
    m1, m2 = comp.marginal1(), comp.marginal2()
    g_a1 = GEParams(comp.alpha1, comp.lam)
    g_a2 = GEParams(comp.alpha2, comp.lam)
    if t1 <= t2:
        df_dt1 = ge_pdf(m1, t1) * ge_cdf(g_a2, t2)
        df_dt2 = ge_cdf(m1, t1) * ge_pdf(g_a2, t2)
    else:
        df_dt1 = ge_pdf(g_a1, t1) * ge_cdf(m2, t2)
        df_dt2 = ge_cdf(g_a1, t1) * ge_pdf(m2, t2)
    ds_dt1 = -ge_pdf(m1, t1) + df_dt1
    ds_dt2 = -ge_pdf(m2, t2) + df_dt2
    return float(ds_dt1), float(ds_dt2)


def hazard_gradient(params: MixtureParams, t1: float, t2: float) -> tuple[float, float]:
    """(-d/dt1 log S, -d/dt2 log S) for the mixture survival S."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("hazard is defined for t1, t2 > 0")
    s = float(np.asarray(mix_survival(params, t1, t2)))
    if s < 1e-300:
        warnings.warn(
            f"joint survival underflowed at ({t1}, {t2})",
            SurvivalUnderflowWarning,
            stacklevel=2,
        )
        return float("inf"), float("inf")
    d1 = d2 = 0.0
    for weight, comp in ((params.p, params.comp0), (1.0 - params.p, params.comp1)):
        c1, c2 = _dsurvival(comp, t1, t2)
        d1 += weight * c1
        d2 += weight * c2
    return -d1 / s, -d2 / s


def conditional_cdf(params: MixtureParams, x1: float, x2: float) -> float:
    """P(X1 <= x1 | X2 = x2) per the printed three-branch form.

    Each component's own rate is substituted into the printed constants (the
    printed form writes a single rate).  The value is reported as printed;
    excursions outside [0, 1] -- which the diagonal branch produces -- are
    flagged with ConditionalRangeWarning rather than clipped.
    """
    if x1 <= 0 or x2 <= 0:
        raise ValueError("conditional CDF is defined for x1, x2 > 0")
    c0, c1 = params.comp0, params.comp1
    a1, a2, a3 = c0.alpha1, c0.alpha2, c0.alpha3
    b1, b2, b3 = c1.alpha1, c1.alpha2, c1.alpha3
    g1i = -np.expm1(-c0.lam * x1)
    g1j = -np.expm1(-c0.lam * x2)
    g2i = -np.expm1(-c1.lam * x1)
    g2j = -np.expm1(-c1.lam * x2)
    denom0 = (a2 + a3) * g1j ** (a2 + a3 - 1.0)
    denom1 = (b2 + b3) * g2j ** (b2 + b3 - 1.0)
    region = classify_region(x1, x2)
    if region is Region.LOWER:
        num0 = g1i ** (a1 + a3) * a2 * g1j ** (a2 - 1.0)
        num1 = g2i ** (b1 + b3) * b2 * g2j ** (b2 - 1.0)
    elif region is Region.UPPER:
        num0 = g1i**a1 * (a2 + a3) * g1j ** (a2 + a3 - 1.0)
        num1 = g2i**b1 * (b2 + b3) * g2j ** (b2 + b3 - 1.0)
    else:
        num0 = (a1 + a2 + a3) * g1j ** (a1 + a2 + a3 - 1.0)
        num1 = (b1 + b2 + b3) * g2j ** (b1 + b2 + b3 - 1.0)
    value = (params.p * num0 + (1.0 - params.p) * num1) / (
        params.p * denom0 + (1.0 - params.p) * denom1
    )
    if not 0.0 <= value <= 1.0:
        warnings.warn(
            f"conditional CDF value {value:.6g} outside [0, 1] at "
            f"({x1}, {x2}), region {region.value}",
            ConditionalRangeWarning,
            stacklevel=2,
        )
    return float(value)


# ---------------------------------------------------------------------------
# summary


@dataclass
class DependenceSummary:
    kendall_paper: float
    kendall_numeric: float
    spearman_paper: float
    spearman_numeric: float
    tail_lower: float
    tail_upper_paper: float
    tail_upper_numeric: float
    flags: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "kendall_paper": self.kendall_paper,
            "kendall_numeric": self.kendall_numeric,
            "spearman_paper": self.spearman_paper,
            "spearman_numeric": self.spearman_numeric,
            "tail_lower": self.tail_lower,
            "tail_upper_paper": self.tail_upper_paper,
            "tail_upper_numeric": self.tail_upper_numeric,
            "flags": dict(self.flags),
        }
        return out


def dependence_summary(params: MixtureParams, n_nodes: int = 96) -> DependenceSummary:
    """All dependence measures, verbatim values flagged, numerics checked."""
    tau_paper, tau_numeric = kendall_tau(params, n_nodes)
    rho_paper, rho_numeric = spearman_rho(params, n_nodes)
    tails = tail_indices(params)
    flags = {
        "kendall_paper": "verbatim, unverified",
        "spearman_paper": "verbatim, unverified",
        "tail_upper_paper": "verbatim, unverified",
    }
    if not -1.0 <= tau_paper <= 1.0:
        flags["kendall_paper"] += "; outside [-1, 1]"
    if not -1.0 <= rho_paper <= 1.0:
        flags["spearman_paper"] += "; outside [-1, 1]"
    if not 0.0 <= tails.upper_paper <= 1.0:
        flags["tail_upper_paper"] += "; outside [0, 1]"
    if tails.upper_out_of_range:
        flags["tail_upper_numeric"] = (
            f"raw limit {tails.upper_numeric_raw:.6g} clamped to [0, 1]"
        )
    return DependenceSummary(
        kendall_paper=tau_paper,
        kendall_numeric=tau_numeric,
        spearman_paper=rho_paper,
        spearman_numeric=rho_numeric,
        tail_lower=tails.lower,
        tail_upper_paper=tails.upper_paper,
        tail_upper_numeric=tails.upper_numeric,
        flags=flags,
    )
