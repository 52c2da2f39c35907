"""Hierarchical EM for the two-component BVGE mixture.

Stage 1 posteriors are the usual mixture responsibilities, computed per data
region (diagonal / lower / upper) because the likelihood channels differ.
Stage 2 replaces the latent Marshall-Olkin ordering indicators by fractional
masses u, w that depend only on the current shape parameters.  The M-step
has closed-form shape updates and a one-dimensional fixed-point equation per
rate.  One outer iteration performs a single ECM-style sweep:

    weight; shapes(comp0 at current lam1); lam1 fixed point at new shapes;
    shapes(comp1); lam2 fixed point.

Each conditional step maximizes (or provably does not decrease) the expected
complete-data log-likelihood, so the observed log-likelihood is monotone up
to float rounding.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.optimize import brentq
from scipy.special import digamma, expit, polygamma

from .bvge import BVGEParams, classify_regions
from .ge import ge_log_base
from .mixture import MixtureParams, component_logdensities, mix_loglik

__all__ = [
    "ModelInadequacyError",
    "DataPartition",
    "Posteriors",
    "FractionalMasses",
    "EMConfig",
    "FitResult",
    "ShapeUpdate",
    "FixedPointResult",
    "partition_data",
    "e_step",
    "m_step_weight",
    "m_step_shapes",
    "lambda_fixed_point",
    "pseudo_loglik",
    "em_fit",
    "random_init",
    "moment_init",
    "single_bvge_em_step",
]


class ModelInadequacyError(RuntimeError):
    """Raised when the data cannot support the model (e.g. every pair tied)."""


@dataclass
class DataPartition:
    """Observations split by region, with original row indices retained."""

    diag_idx: np.ndarray
    diag_y: np.ndarray
    lower_idx: np.ndarray
    lower_x1: np.ndarray
    lower_x2: np.ndarray
    upper_idx: np.ndarray
    upper_x1: np.ndarray
    upper_x2: np.ndarray

    @property
    def n0(self) -> int:
        return self.diag_y.size

    @property
    def n1(self) -> int:
        return self.lower_x1.size

    @property
    def n2(self) -> int:
        return self.upper_x1.size

    @property
    def n(self) -> int:
        return self.n0 + self.n1 + self.n2


def partition_data(pairs, tie_tol: float = 0.0) -> DataPartition:
    """Split (x1, x2) rows into the diagonal / lower / upper sets.

    Rejects non-finite or non-positive coordinates, naming the first
    offending row.  Diagonal rows store y = x1 (= x2 up to the tie rule).
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of pairs")
    if arr.shape[0] == 0:
        raise ValueError("data must contain at least one observation")
    bad = ~np.isfinite(arr) | (arr <= 0.0)
    if np.any(bad):
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise ValueError(
            f"row {row}: coordinates must be finite and > 0, got {tuple(arr[row])}"
        )
    x1, x2 = arr[:, 0], arr[:, 1]
    codes = classify_regions(x1, x2, tie_tol)
    diag = codes == 0
    low = codes == 1
    up = codes == 2
    return DataPartition(
        diag_idx=np.flatnonzero(diag),
        diag_y=x1[diag],
        lower_idx=np.flatnonzero(low),
        lower_x1=x1[low],
        lower_x2=x2[low],
        upper_idx=np.flatnonzero(up),
        upper_x1=x1[up],
        upper_x2=x2[up],
    )


def partition_arrays(part: DataPartition):
    """(x1, x2, region codes) concatenated in diag, lower, upper order."""
    x1 = np.concatenate([part.diag_y, part.lower_x1, part.upper_x1])
    x2 = np.concatenate([part.diag_y, part.lower_x2, part.upper_x2])
    codes = np.concatenate(
        [
            np.zeros(part.n0, dtype=np.int8),
            np.ones(part.n1, dtype=np.int8),
            np.full(part.n2, 2, dtype=np.int8),
        ]
    )
    return x1, x2, codes


@dataclass
class Posteriors:
    """Per-observation responsibility of component 0 in each region."""

    p00: np.ndarray  # diagonal
    p01: np.ndarray  # lower
    p02: np.ndarray  # upper
    degenerate_count: int = 0

    @property
    def p10(self) -> np.ndarray:
        return 1.0 - self.p00

    @property
    def p11(self) -> np.ndarray:
        return 1.0 - self.p01

    @property
    def p12(self) -> np.ndarray:
        return 1.0 - self.p02

    def component(self, component: int):
        if component == 0:
            return self.p00, self.p01, self.p02
        return self.p10, self.p11, self.p12


@dataclass(frozen=True)
class FractionalMasses:
    """Conditional probabilities of the latent ordering per region.

    u pairs refer to lower-region pseudo observations, w pairs to upper; the
    first index is the component.  Each pair sums to one exactly.
    """

    u01: float
    u02: float
    w01: float
    w02: float
    u11: float
    u12: float
    w11: float
    w12: float

    @classmethod
    def from_params(cls, params: MixtureParams) -> "FractionalMasses":
        c0, c1 = params.comp0, params.comp1
        return cls(
            u01=c0.alpha1 / (c0.alpha1 + c0.alpha3),
            u02=c0.alpha3 / (c0.alpha1 + c0.alpha3),
            w01=c0.alpha2 / (c0.alpha2 + c0.alpha3),
            w02=c0.alpha3 / (c0.alpha2 + c0.alpha3),
            u11=c1.alpha1 / (c1.alpha1 + c1.alpha3),
            u12=c1.alpha3 / (c1.alpha1 + c1.alpha3),
            w11=c1.alpha2 / (c1.alpha2 + c1.alpha3),
            w12=c1.alpha3 / (c1.alpha2 + c1.alpha3),
        )

    def component(self, component: int):
        if component == 0:
            return self.u01, self.u02, self.w01, self.w02
        return self.u11, self.u12, self.w11, self.w12


@dataclass(frozen=True)
class EMConfig:
    rel_tol: float = 1e-8
    max_iter: int = 5000
    fp_tol: float = 1e-9
    fp_max_iter: int = 200
    fp_damping: float = 1.0
    init: str = "random"
    tie_tol: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.fp_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1 or self.fp_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if not 0.0 < self.fp_damping <= 1.0:
            raise ValueError("fp_damping must lie in (0, 1]")
        if self.init not in ("random", "moment"):
            raise ValueError(f"unknown init strategy {self.init!r}")
        if self.tie_tol < 0:
            raise ValueError("tie_tol must be >= 0")


@dataclass
class FitResult:
    params: MixtureParams
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    stop_reason: str  # "tolerance" | "iteration_cap"
    notes: tuple[str, ...] = ()


def e_step(params: MixtureParams, part: DataPartition):
    """Responsibilities (log-space) plus the current fractional masses.

    If both component densities underflow at a point the responsibility
    defaults to 0.5 and the degenerate counter is incremented.
    """
    masses = FractionalMasses.from_params(params)
    log_p = np.log(params.p)
    log_q = np.log1p(-params.p)
    resp = []
    degenerate = 0
    for x1, x2, code in (
        (part.diag_y, part.diag_y, 0),
        (part.lower_x1, part.lower_x2, 1),
        (part.upper_x1, part.upper_x2, 2),
    ):
        if x1.size == 0:
            resp.append(np.empty(0))
            continue
        l0, l1 = component_logdensities(params, x1, x2, code)
        with np.errstate(invalid="ignore"):
            r = expit((log_p + np.asarray(l0)) - (log_q + np.asarray(l1)))
        dead = ~np.isfinite(r)
        if np.any(dead):
            degenerate += int(dead.sum())
            r = np.where(dead, 0.5, r)
        resp.append(r)
    return Posteriors(resp[0], resp[1], resp[2], degenerate_count=degenerate), masses


def m_step_weight(post: Posteriors, n: int) -> float:
    """Mean responsibility, nudged off the exact {0,1} boundary.

    MixtureParams rejects the boundary itself; the nudge keeps a collapsing
    EM path representable without enforcing any wider band.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    total = float(post.p00.sum() + post.p01.sum() + post.p02.sum())
    p = total / n
    return float(np.clip(p, np.finfo(float).tiny, np.nextafter(1.0, 0.0)))


@dataclass(frozen=True)
class ShapeUpdate:
    shape1: float
    shape2: float
    shape3: float
    denom_a: float
    denom_b: float
    denom_d: float
    degenerate: tuple[bool, bool, bool] = (False, False, False)

    def shapes(self) -> tuple[float, float, float]:
        return (self.shape1, self.shape2, self.shape3)


def _component_inputs(post: Posteriors, masses: FractionalMasses, component: int):
    q_diag, q_low, q_up = post.component(component)
    u1, u2, w1, w2 = masses.component(component)
    return q_diag, q_low, q_up, u1, u2, w1, w2


def m_step_shapes(
    post: Posteriors,
    masses: FractionalMasses,
    part: DataPartition,
    lam: float,
    component: int,
    fallback: tuple[float, float, float] | None = None,
) -> ShapeUpdate:
    """Closed-form shape updates at fixed rate.

    Numerators are negated responsibility totals; denominators A, B, D are
    responsibility-weighted sums of log(1 - exp(-lam*x)) terms, hence
    negative, so the updates are positive whenever the denominators are
    nonzero.  A zero denominator flags a degenerate update that keeps the
    fallback value.
    """
    q_diag, q_low, q_up, u1, u2, w1, w2 = _component_inputs(post, masses, component)
    log_diag = float(q_diag @ ge_log_base(lam, part.diag_y)) if part.n0 else 0.0
    log_low1 = float(q_low @ ge_log_base(lam, part.lower_x1)) if part.n1 else 0.0
    log_low2 = float(q_low @ ge_log_base(lam, part.lower_x2)) if part.n1 else 0.0
    log_up1 = float(q_up @ ge_log_base(lam, part.upper_x1)) if part.n2 else 0.0
    log_up2 = float(q_up @ ge_log_base(lam, part.upper_x2)) if part.n2 else 0.0
    s_diag = float(q_diag.sum())
    s_low = float(q_low.sum())
    s_up = float(q_up.sum())

    denom_a = log_diag + log_low1 + log_up1
    denom_b = log_diag + log_low2 + log_up2
    denom_d = log_diag + log_low1 + log_up2
    numer = (
        u1 * s_low + s_up,
        s_low + w1 * s_up,
        s_diag + u2 * s_low + w2 * s_up,
    )
    if fallback is None:
        fallback = (float("nan"),) * 3
    shapes = []
    degenerate = []
    for num, den, fb in zip(numer, (denom_a, denom_b, denom_d), fallback):
        if den == 0.0 or not np.isfinite(den):
            shapes.append(fb)
            degenerate.append(True)
        else:
            shapes.append(-num / den)
            degenerate.append(False)
    return ShapeUpdate(
        shapes[0], shapes[1], shapes[2], denom_a, denom_b, denom_d, tuple(degenerate)
    )


@dataclass(frozen=True)
class FixedPointResult:
    lam: float
    converged: bool
    residual: float
    iterations: int
    used_bisection: bool = False


def _rate_sums(post, masses, part, component):
    """Constant pieces of the rate equation for one component."""
    q_diag, q_low, q_up, u1, u2, w1, w2 = _component_inputs(post, masses, component)
    s_diag = float(q_diag.sum())
    s_low = float(q_low.sum())
    s_up = float(q_up.sum())
    count_term = s_diag + 2.0 * s_low + 2.0 * s_up  # u1+u2 = w1+w2 = 1
    linear = (
        float(q_diag @ part.diag_y)
        + float(q_low @ part.lower_x1)
        + float(q_low @ part.lower_x2)
        + float(q_up @ part.upper_x1)
        + float(q_up @ part.upper_x2)
    )
    return count_term, linear, (q_diag, q_low, q_up)


def _rate_correction(lam, part, shapes, q_diag, q_low, q_up):
    """Sum of (shape-1)-weighted x*exp(-lam*x)/(1-exp(-lam*x)) terms."""
    a1, a2, a3 = shapes
    total = 0.0
    if part.n0:
        total += (a1 + a2 + a3 - 1.0) * float(
            (q_diag * part.diag_y) @ (1.0 / np.expm1(lam * part.diag_y))
        )
    if part.n1:
        total += (a1 + a3 - 1.0) * float(
            (q_low * part.lower_x1) @ (1.0 / np.expm1(lam * part.lower_x1))
        )
        total += (a2 - 1.0) * float(
            (q_low * part.lower_x2) @ (1.0 / np.expm1(lam * part.lower_x2))
        )
    if part.n2:
        total += (a2 + a3 - 1.0) * float(
            (q_up * part.upper_x2) @ (1.0 / np.expm1(lam * part.upper_x2))
        )
        total += (a1 - 1.0) * float(
            (q_up * part.upper_x1) @ (1.0 / np.expm1(lam * part.upper_x1))
        )
    return total


def lambda_fixed_point(
    post: Posteriors,
    masses: FractionalMasses,
    part: DataPartition,
    shapes: tuple[float, float, float],
    component: int,
    cfg: EMConfig,
    lam0: float,
) -> FixedPointResult:
    """Solve g(lam) = lam for the rate of one component at fixed shapes.

    g(lam) is the weighted count total over the weighted data total with its
    lam-dependent correction terms.  Damped iteration with halving on
    sign-alternating residuals; if the iterate leaves (0, inf) or the
    denominator loses positivity, falls back to bracketed root finding on
    the scaled stationarity residual.
    """
    count_term, linear, qs = _rate_sums(post, masses, part, component)

    def denom(lam: float) -> float:
        return linear - _rate_correction(lam, part, shapes, *qs)

    def g(lam: float) -> float:
        d = denom(lam)
        return count_term / d if d > 0 else float("nan")

    lam = float(lam0)
    damping = cfg.fp_damping
    prev_residual = None
    for iteration in range(1, cfg.fp_max_iter + 1):
        value = g(lam)
        if not np.isfinite(value) or value <= 0.0:
            return _bisect_rate(count_term, denom, lam0, cfg, iteration)
        residual = value - lam
        if abs(residual) < cfg.fp_tol:
            return FixedPointResult(lam, True, abs(residual), iteration)
        if prev_residual is not None and residual * prev_residual < 0.0:
            damping = max(damping / 2.0, 1e-3)
        new_lam = (1.0 - damping) * lam + damping * value
        if new_lam <= 0.0 or not np.isfinite(new_lam):
            return _bisect_rate(count_term, denom, lam0, cfg, iteration)
        lam, prev_residual = new_lam, residual
    return FixedPointResult(lam, False, abs(g(lam) - lam) if np.isfinite(g(lam)) else float("inf"),
                            cfg.fp_max_iter)


def _bisect_rate(count_term, denom, lam0, cfg, iterations_so_far) -> FixedPointResult:
    # root of h(lam) = count_term/lam - denom(lam), the scaled stationarity
    # residual; equivalent to the fixed point wherever denom > 0
    def h(lam: float) -> float:
        return count_term / lam - denom(lam)

    grid = lam0 * np.logspace(-8.0, 8.0, 81)
    values = np.array([h(g) for g in grid])
    finite = np.isfinite(values)
    sign_change = None
    for i in range(len(grid) - 1):
        if finite[i] and finite[i + 1] and values[i] * values[i + 1] < 0.0:
            sign_change = (grid[i], grid[i + 1])
            break
    if sign_change is None:
        best = int(np.nanargmin(np.where(finite, np.abs(values), np.nan)))
        return FixedPointResult(float(grid[best]), False, float(abs(values[best])),
                                iterations_so_far, used_bisection=True)
    root = brentq(h, *sign_change, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    d = denom(root)
    residual = abs(count_term / d - root) if d > 0 else float("inf")
    return FixedPointResult(float(root), residual < cfg.fp_tol, float(residual),
                            iterations_so_far, used_bisection=True)


def _component_pseudo_loglik(part, q_diag, q_low, q_up, u1, u2, w1, w2, shapes, lam):
    """One component's share of the expected complete-data log-likelihood.

    Transcribed bracket by bracket from the two-stage decomposition: the
    diagonal block, the two lower-region pseudo-observation brackets (masses
    u1, u2) plus the plain x2 block, and the mirrored upper-region blocks.
    """
    a1, a2, a3 = shapes
    log_lam = np.log(lam)
    total = 0.0
    if part.n0:
        log_g = ge_log_base(lam, part.diag_y)
        s = float(q_diag.sum())
        total += s * np.log(a3) + s * log_lam
        total += (a1 + a2 + a3 - 1.0) * float(q_diag @ log_g)
        total += -lam * float(q_diag @ part.diag_y)
    if part.n1:
        s = float(q_low.sum())
        log_g1 = ge_log_base(lam, part.lower_x1)
        log_g2 = ge_log_base(lam, part.lower_x2)
        sum_x1 = float(q_low @ part.lower_x1)
        sum_g1 = float(q_low @ log_g1)
        total += u1 * (s * np.log(a1) + 2.0 * s * log_lam - lam * sum_x1
                       + (a1 + a3 - 1.0) * sum_g1)
        total += u2 * (s * np.log(a3) + 2.0 * s * log_lam - lam * sum_x1
                       + (a1 + a3 - 1.0) * sum_g1)
        total += (s * np.log(a2) - lam * float(q_low @ part.lower_x2)
                  + (a2 - 1.0) * float(q_low @ log_g2))
    if part.n2:
        s = float(q_up.sum())
        log_g1 = ge_log_base(lam, part.upper_x1)
        log_g2 = ge_log_base(lam, part.upper_x2)
        sum_x2 = float(q_up @ part.upper_x2)
        sum_g2 = float(q_up @ log_g2)
        total += w1 * (s * np.log(a2) + 2.0 * s * log_lam - lam * sum_x2
                       + (a2 + a3 - 1.0) * sum_g2)
        total += w2 * (s * np.log(a3) + 2.0 * s * log_lam - lam * sum_x2
                       + (a2 + a3 - 1.0) * sum_g2)
        total += (s * np.log(a1) - lam * float(q_up @ part.upper_x1)
                  + (a1 - 1.0) * float(q_up @ log_g1))
    return float(total)


def pseudo_loglik(
    params: MixtureParams,
    post: Posteriors,
    masses: FractionalMasses,
    part: DataPartition,
) -> float:
    """Expected complete-data log-likelihood at fixed posteriors and masses.

    Its partial derivatives vanish at the M-step outputs, which the tests
    check by finite differences.
    """
    s0 = float(post.p00.sum() + post.p01.sum() + post.p02.sum())
    s1 = float(part.n) - s0
    total = s0 * np.log(params.p) + s1 * np.log1p(-params.p)
    total += _component_pseudo_loglik(
        part, post.p00, post.p01, post.p02, *masses.component(0),
        params.comp0.shapes(), params.comp0.lam,
    )
    total += _component_pseudo_loglik(
        part, post.p10, post.p11, post.p12, *masses.component(1),
        params.comp1.shapes(), params.comp1.lam,
    )
    return float(total)


def random_init(rng: np.random.Generator) -> MixtureParams:
    """Shapes log-uniform on [0.2, 3], rates on [0.3, 3], p uniform [0.2, 0.8]."""
    shapes = np.exp(rng.uniform(np.log(0.2), np.log(3.0), size=6))
    rates = np.exp(rng.uniform(np.log(0.3), np.log(3.0), size=2))
    p = rng.uniform(0.2, 0.8)
    return MixtureParams(
        p,
        BVGEParams(shapes[0], shapes[1], shapes[2], rates[0]),
        BVGEParams(shapes[3], shapes[4], shapes[5], rates[1]),
    )


def _ge_moment_fit(values: np.ndarray) -> tuple[float, float]:
    """Match a GE(shape, rate) to a sample by mean and variance."""
    mean = float(values.mean())
    var = float(values.var())
    if not np.isfinite(var) or var <= 0 or mean <= 0:
        return 1.0, 1.0 / max(mean, 1e-6)
    ratio = mean * mean / var

    def excess(log_a):
        a = np.exp(log_a)
        num = (digamma(a + 1.0) - digamma(1.0)) ** 2
        den = polygamma(1, 1.0) - polygamma(1, a + 1.0)
        return num / den - ratio

    lo, hi = np.log(1e-3), np.log(1e3)
    try:
        if excess(lo) * excess(hi) < 0:
            shape = float(np.exp(brentq(excess, lo, hi, xtol=1e-10)))
        else:
            shape = 1.0
    except ValueError:
        shape = 1.0
    rate = (digamma(shape + 1.0) - digamma(1.0)) / mean
    return shape, max(rate, 1e-6)


def moment_init(x1, x2, tie_tol: float, rng: np.random.Generator) -> MixtureParams:
    """Two-means split plus per-group marginal moment matching.

    The tie fraction inside each group pins the shared shape; coordinates
    pin the marginal shapes and (averaged) rate.  Falls back to random_init
    when a group is too small to summarize.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    points = np.column_stack([x1, x2])
    _, assignment = kmeans2(points, 2, minit="++", seed=rng, missing="raise")
    comps = []
    weights = []
    for k in (0, 1):
        group = assignment == k
        if group.sum() < 5:
            return random_init(rng)
        g1, g2 = x1[group], x2[group]
        codes = classify_regions(g1, g2, tie_tol)
        tie_frac = float(np.mean(codes == 0))
        a13, rate1 = _ge_moment_fit(g1)
        a23, rate2 = _ge_moment_fit(g2)
        rate = 0.5 * (rate1 + rate2)
        alpha3 = max(tie_frac * (a13 + a23) / (1.0 + tie_frac), 0.01)
        alpha1 = max(a13 - alpha3, 0.01)
        alpha2 = max(a23 - alpha3, 0.01)
        comps.append(BVGEParams(alpha1, alpha2, alpha3, rate))
        weights.append(float(group.mean()))
    p = float(np.clip(weights[0], 0.05, 0.95))
    return MixtureParams(p, comps[0], comps[1])


def _one_sweep(params, post, masses, part, cfg):
    """One ECM sweep; the rate steps keep the old value if they would
    decrease the component's expected complete-data log-likelihood."""
    notes = []
    p_new = m_step_weight(post, part.n)
    new_comps = []
    for component, comp in ((0, params.comp0), (1, params.comp1)):
        update = m_step_shapes(post, masses, part, comp.lam, component,
                               fallback=comp.shapes())
        if any(update.degenerate):
            notes.append(f"component {component}: degenerate shape update retained previous value")
        shapes = update.shapes()
        fp = lambda_fixed_point(post, masses, part, shapes, component, cfg, comp.lam)
        q_diag, q_low, q_up, u1, u2, w1, w2 = _component_inputs(post, masses, component)
        q_old = _component_pseudo_loglik(part, q_diag, q_low, q_up, u1, u2, w1, w2,
                                         shapes, comp.lam)
        q_new = _component_pseudo_loglik(part, q_diag, q_low, q_up, u1, u2, w1, w2,
                                         shapes, fp.lam)
        lam = fp.lam if q_new >= q_old else comp.lam
        if q_new < q_old:
            notes.append(f"component {component}: rate update rejected (objective decrease)")
        new_comps.append(BVGEParams(*shapes, lam))
    return MixtureParams(p_new, new_comps[0], new_comps[1]), notes


def em_fit(pairs, cfg: EMConfig | None = None, init: MixtureParams | None = None) -> FitResult:
    """Fit the 9-parameter mixture by the hierarchical EM.

    Stops when the relative log-likelihood change drops below cfg.rel_tol or
    at cfg.max_iter (returned with converged=False).  `init` overrides the
    configured initialization strategy.
    """
    cfg = cfg or EMConfig()
    part = partition_data(pairs, cfg.tie_tol)
    if part.n < 2:
        raise ValueError("need at least 2 observations")
    if part.n1 + part.n2 == 0:
        raise ModelInadequacyError(
            "every observation is tied (x1 = x2); the planar part of the "
            "model cannot be identified"
        )
    if init is None:
        rng = np.random.default_rng(cfg.seed)
        if cfg.init == "random":
            init = random_init(rng)
        else:
            x1, x2, _ = partition_arrays(part)
            init = moment_init(x1, x2, cfg.tie_tol, rng)
    params = init
    x1, x2, codes = partition_arrays(part)
    loglik = mix_loglik(params, x1, x2, codes)
    trace = [loglik]
    notes: list[str] = []
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        post, masses = e_step(params, part)
        params, sweep_notes = _one_sweep(params, post, masses, part, cfg)
        for note in sweep_notes:
            if note not in notes:
                notes.append(note)
        new_loglik = mix_loglik(params, x1, x2, codes)
        trace.append(new_loglik)
        if abs(new_loglik - loglik) / (abs(loglik) + 1.0) < cfg.rel_tol:
            converged = True
            loglik = new_loglik
            break
        loglik = new_loglik
    if _components_identical(params):
        notes.append("components numerically identical; mixture weight not identifiable")
    return FitResult(
        params=params,
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        stop_reason="tolerance" if converged else "iteration_cap",
        notes=tuple(notes),
    )


def _components_identical(params: MixtureParams, rel: float = 1e-6) -> bool:
    a = np.array([params.comp0.alpha1, params.comp0.alpha2, params.comp0.alpha3,
                  params.comp0.lam])
    b = np.array([params.comp1.alpha1, params.comp1.alpha2, params.comp1.alpha3,
                  params.comp1.lam])
    return bool(np.all(np.abs(a - b) <= rel * np.maximum(np.abs(a), np.abs(b))))


def single_bvge_em_step(
    shapes: tuple[float, float, float],
    lam: float,
    part: DataPartition,
    cfg: EMConfig | None = None,
):
    """One EM sweep for a single (non-mixture) BVGE component.

    Written directly from the one-component decomposition, independently of
    the weighted mixture path: with every observation fully attributed, the
    shape updates are ratios of counts to summed log-bases and the rate
    solves its own fixed-point equation.  Serves as the reduction oracle for
    the mixture code.
    """
    cfg = cfg or EMConfig()
    a1, a2, a3 = (float(s) for s in shapes)
    u1 = a1 / (a1 + a3)
    u2 = a3 / (a1 + a3)
    w1 = a2 / (a2 + a3)
    w2 = a3 / (a2 + a3)
    n0, n1, n2 = part.n0, part.n1, part.n2
    log_diag = float(np.sum(ge_log_base(lam, part.diag_y)))
    log_low1 = float(np.sum(ge_log_base(lam, part.lower_x1)))
    log_low2 = float(np.sum(ge_log_base(lam, part.lower_x2)))
    log_up1 = float(np.sum(ge_log_base(lam, part.upper_x1)))
    log_up2 = float(np.sum(ge_log_base(lam, part.upper_x2)))
    new_a1 = -(u1 * n1 + n2) / (log_diag + log_low1 + log_up1)
    new_a2 = -(n1 + w1 * n2) / (log_diag + log_low2 + log_up2)
    new_a3 = -(n0 + u2 * n1 + w2 * n2) / (log_diag + log_low1 + log_up2)

    count_term = n0 + 2.0 * n1 + 2.0 * n2
    linear = float(part.diag_y.sum() + part.lower_x1.sum() + part.lower_x2.sum()
                   + part.upper_x1.sum() + part.upper_x2.sum())

    def correction(rate: float) -> float:
        total = 0.0
        if n0:
            total += (new_a1 + new_a2 + new_a3 - 1.0) * float(
                part.diag_y @ (1.0 / np.expm1(rate * part.diag_y)))
        if n1:
            total += (new_a1 + new_a3 - 1.0) * float(
                part.lower_x1 @ (1.0 / np.expm1(rate * part.lower_x1)))
            total += (new_a2 - 1.0) * float(
                part.lower_x2 @ (1.0 / np.expm1(rate * part.lower_x2)))
        if n2:
            total += (new_a2 + new_a3 - 1.0) * float(
                part.upper_x2 @ (1.0 / np.expm1(rate * part.upper_x2)))
            total += (new_a1 - 1.0) * float(
                part.upper_x1 @ (1.0 / np.expm1(rate * part.upper_x1)))
        return total

    rate = float(lam)
    for _ in range(cfg.fp_max_iter):
        denom = linear - correction(rate)
        if denom <= 0:
            break
        value = count_term / denom
        if abs(value - rate) < cfg.fp_tol:
            rate = value
            break
        rate = value
    return (new_a1, new_a2, new_a3), rate
