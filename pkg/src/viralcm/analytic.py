"""Closed-form and semi-analytic quantities for influence diffusion.

The campaign goes viral (reaches a positive fraction from a positive
fraction of pioneers) iff E[D(t) D] > E[D(t)] + E[D].  The limiting
fractions come from the unique zeros in (0, 1) of

    H(x)    = E[D] x^2 - E[D(r)] x - E[D(t) x^D]
    Hbar(x) = E[D] x^2 - E[D(t) x^D(t)] - E[D(r) x^D(t)] x
    H0(x)   = E[D] x^2 - x G_D'(x)

as alpha = 1 - G_D(xi), alpha_bar = 1 - G_Dt(xi_bar) (good pioneers), and
alpha0 = 1 - G_D(xi0) (the giant component of the undirected graph, which
exists iff E[D(D-2)] > 0).  All of this works both for a parametric
population law and for the plug-in estimators built from a degree sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .populations import (
    DegreeSample,
    JointDegreeLaw,
    JointMoments,
    PowerLawDegree,
)
from .special import polylog, stirling1_signed, stirling2, zeta

__all__ = [
    "GenFnBundle",
    "AnalyticResult",
    "SizeBiasedLaw",
    "BranchingCheck",
    "RootBracketingError",
    "viral_condition",
    "giant_condition",
    "build_genfns",
    "eval_H",
    "eval_Hbar",
    "eval_H0",
    "find_root",
    "fractions",
    "analyze",
    "bernoulli_threshold",
    "size_biased_law",
    "branching_crosscheck",
]

#: Condition margins smaller than this are reported as critical; the
#: large-network approximation carries no information there.
CRITICAL_MARGIN = 1e-9

#: Required residual at a returned root.
ROOT_RESIDUAL = 1e-12

_SCAN_STEP = 1e-3
_SCAN_HI = 1.0 - 1e-6
_SCAN_LO = 1e-6


class RootBracketingError(RuntimeError):
    """A zero was expected in (0, 1) but no sign change could be certified."""


@dataclass(frozen=True)
class GenFnBundle:
    """Generating functions and moments of one (D, D(t)) population.

    All callables take a scalar x in [0, 1].  ``m_dt_xd``, ``m_dt_xdt`` and
    ``m_dr_xdt`` are the mixed expectations E[D(t) x^D], E[D(t) x^D(t)] and
    E[D(r) x^D(t)].  Sample-built bundles carry dedicated ``h``/``hbar``/
    ``h0`` evaluators whose per-observation terms cancel exactly at x = 1.
    """

    mean_d: float
    mean_dr: float
    mean_dt: float
    g_d: Callable[[float], float]
    g_dt: Callable[[float], float]
    dg_d: Callable[[float], float]
    m_dt_xd: Callable[[float], float]
    m_dt_xdt: Callable[[float], float]
    m_dr_xdt: Callable[[float], float]
    label: str = ""
    h: Optional[Callable[[float], float]] = None
    hbar: Optional[Callable[[float], float]] = None
    h0: Optional[Callable[[float], float]] = None


def viral_condition(mom: JointMoments) -> bool:
    """E[D(t) D] > E[D(t)] + E[D] (a divergent left side counts as true)."""
    return mom.mean_dt_d > mom.mean_dt + mom.mean_d


def giant_condition(mom: JointMoments) -> bool:
    """E[D(D-2)] > 0, i.e. E[D^2] > 2 E[D] (divergent E[D^2] counts as true)."""
    return mom.mean_d2 > 2.0 * mom.mean_d


def viral_margin(mom: JointMoments) -> float:
    return mom.mean_dt_d - (mom.mean_dt + mom.mean_d)


def giant_margin(mom: JointMoments) -> float:
    return mom.mean_d2 - 2.0 * mom.mean_d


# ---------------------------------------------------------------------------
# Bundle builders
# ---------------------------------------------------------------------------


def build_genfns(source) -> GenFnBundle:
    """Generating-function bundle from a JointDegreeLaw or a DegreeSample."""
    if isinstance(source, DegreeSample):
        return _bundle_from_sample(source)
    if isinstance(source, JointDegreeLaw):
        if isinstance(source.degree, PowerLawDegree):
            return _bundle_powerlaw(source)
        return _bundle_from_atoms(source)
    raise TypeError(f"cannot build generating functions from {type(source).__name__}")


def _bundle_from_sample(sample: DegreeSample) -> GenFnBundle:
    pairs = np.stack([sample.degree, sample.transmitter_degree], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    d = uniq[:, 0].astype(np.float64)
    t = uniq[:, 1].astype(np.float64)
    w = counts.astype(np.float64) / len(sample)
    mom = sample.moments()
    d_pos = d >= 1.0

    def g_d(x):
        return float(np.dot(w, x**d))

    def g_dt(x):
        return float(np.dot(w, x**t))

    def dg_d(x):
        return float(np.dot(w[d_pos] * d[d_pos], x ** (d[d_pos] - 1.0)))

    def m_dt_xd(x):
        return float(np.dot(w * t, x**d))

    def m_dt_xdt(x):
        return float(np.dot(w * t, x**t))

    def m_dr_xdt(x):
        return float(np.dot(w * (d - t), x**t))

    # Per-group forms of H/Hbar/H0: each group term vanishes exactly at
    # x = 1 in float arithmetic, so the plug-in estimators satisfy
    # H(1) = Hbar(1) = 0 identically, not just to rounding.
    def h(x):
        return float(np.dot(w, d * x * x - (d - t) * x - t * x**d))

    def hbar(x):
        return float(np.dot(w, d * x * x - t * x**t - (d - t) * x ** (t + 1.0)))

    def h0(x):
        return float(np.dot(w, d * x * x - d * x**d))

    return GenFnBundle(
        mean_d=mom.mean_d,
        mean_dr=mom.mean_dr,
        mean_dt=mom.mean_dt,
        g_d=g_d,
        g_dt=g_dt,
        dg_d=dg_d,
        m_dt_xd=m_dt_xd,
        m_dt_xdt=m_dt_xdt,
        m_dr_xdt=m_dr_xdt,
        label=f"sample(n={len(sample)})",
        h=h,
        hbar=hbar,
        h0=h0,
    )


def _bundle_from_atoms(law: JointDegreeLaw) -> GenFnBundle:
    """Bundle for a degree law with a materialized (truncated) support.

    Mixed expectations are truncated sums over the degree atoms with the
    conditional transmitter law folded in: closed conditional forms for
    Bernoulli / node percolation, an occupancy-pmf matrix for the coupon
    model.
    """
    support, weights = law.degree.atoms()
    d = support.astype(np.float64)
    w = weights
    mom = law.moments()
    tr = law.transmission
    d_pos = support >= 1

    def g_d(x):
        return float(np.dot(w, x**d))

    def dg_d(x):
        return float(np.dot(w[d_pos] * d[d_pos], x ** (d[d_pos] - 1.0)))

    if tr.kind == "bernoulli":
        p = tr.p

        def g_dt(x):
            return float(np.dot(w, (1.0 - p + p * x) ** d))

        def m_dt_xd(x):
            return float(np.dot(w, p * d * x**d))

        def m_dt_xdt(x):
            y = 1.0 - p + p * x
            return float(np.dot(w[d_pos] * d[d_pos] * p * x, y ** (d[d_pos] - 1.0)))

        def m_dr_xdt(x):
            y = 1.0 - p + p * x
            return float(np.dot(w[d_pos] * d[d_pos] * (1.0 - p), y ** (d[d_pos] - 1.0)))

    elif tr.kind == "nodeperc":
        p = tr.p

        def g_dt(x):
            return (1.0 - p) + p * g_d(x)

        def m_dt_xd(x):
            return float(np.dot(w, p * d * x**d))

        m_dt_xdt = m_dt_xd

        def m_dr_xdt(x, _mean=mom.mean_d):
            return (1.0 - p) * _mean

    elif tr.kind == "coupon":
        K = tr.K
        karr = np.arange(K + 1, dtype=np.float64)
        Q = np.zeros((support.size, K + 1))
        for i, di in enumerate(support):
            cpmf = tr.conditional_pmf(int(di))
            Q[i, cpmf.support] = cpmf.weights
        mt = tr.mean_t(support)

        def g_dt(x):
            return float(np.dot(w, Q @ x**karr))

        def m_dt_xd(x):
            return float(np.dot(w * mt, x**d))

        def m_dt_xdt(x):
            return float(np.dot(w, Q @ (karr * x**karr)))

        def m_dr_xdt(x):
            qx = Q @ x**karr
            qkx = Q @ (karr * x**karr)
            return float(np.dot(w, d * qx - qkx))

    else:  # pragma: no cover - unknown model
        raise TypeError(f"unsupported transmission model {tr!r}")

    return GenFnBundle(
        mean_d=mom.mean_d,
        mean_dr=mom.mean_dr,
        mean_dt=mom.mean_dt,
        g_d=g_d,
        g_dt=g_dt,
        dg_d=dg_d,
        m_dt_xd=m_dt_xd,
        m_dt_xdt=m_dt_xdt,
        m_dr_xdt=m_dr_xdt,
        label=f"law({law.degree!r}, {tr!r})",
    )


def _bundle_powerlaw(law: JointDegreeLaw) -> GenFnBundle:
    """Closed-form bundle for power-law degrees.

    A pmf truncated to tail mass 1e-12 would need ~1e8 atoms at beta = 2.45,
    so the mixed expectations are expressed through the polylogarithm
    instead: exactly for Bernoulli and node percolation, and through the
    falling-factorial (Stirling) expansion of the occupancy law for the
    coupon model, whose degree moments reduce to zeta ratios.
    """
    deg: PowerLawDegree = law.degree
    tr = law.transmission
    mom = law.moments()
    g_d = deg.pgf
    dg_d = deg.pgf_prime

    if tr.kind == "bernoulli":
        p = tr.p

        def g_dt(x):
            return deg.pgf(1.0 - p * (1.0 - x))

        def m_dt_xd(x):
            return p * x * dg_d(x)

        def m_dt_xdt(x):
            y = 1.0 - p * (1.0 - x)
            return p * x * dg_d(y)

        def m_dr_xdt(x):
            y = 1.0 - p * (1.0 - x)
            return (1.0 - p) * dg_d(y)

    elif tr.kind == "nodeperc":
        p = tr.p

        def g_dt(x):
            return (1.0 - p) + p * g_d(x)

        def m_dt_xd(x):
            return p * x * dg_d(x)

        m_dt_xdt = m_dt_xd

        def m_dr_xdt(x, _mean=mom.mean_d):
            return (1.0 - p) * _mean

    elif tr.kind == "coupon":
        K = tr.K
        if K == 0:
            g_dt = lambda x: 1.0  # noqa: E731 - degenerate D(t) = 0
            m_dt_xd = lambda x: 0.0  # noqa: E731
            m_dt_xdt = lambda x: 0.0  # noqa: E731
            m_dr_xdt = lambda x, _mean=mom.mean_d: _mean  # noqa: E731
        else:
            # P{D(t)=k | D=d} = (d)_k {K over k} / d^K with
            # (d)_k = sum_s s1(k, s) d^s reduces every degree average to
            # E[D^(s-K)] and E[D^(s-K+1)], i.e. zeta ratios.
            a = np.zeros(K + 1)  # E[x^D(t)] polynomial coefficients
            b = np.zeros(K + 1)  # E[D 1{D(t)=k}] coefficients
            for k in range(K + 1):
                s2 = float(stirling2(K, k))
                if s2 == 0.0:
                    continue
                for s in range(k + 1):
                    s1 = float(stirling1_signed(k, s))
                    if s1 == 0.0:
                        continue
                    a[k] += s2 * s1 * deg.neg_moment(K - s)
                    b[k] += s2 * s1 * deg.neg_moment(K - s - 1)
            karr = np.arange(K + 1, dtype=np.float64)
            mand = [math.comb(K, j) * (-1.0) ** (j + 1) for j in range(1, K + 1)]
            zb = zeta(deg.beta)

            def g_dt(x):
                return float(np.dot(a, x**karr))

            def m_dt_xd(x):
                # E[D(t) x^D] = sum_j (-1)^(j+1) C(K,j) Li_{beta+j-1}(x)/zeta(beta)
                if x == 0.0:
                    return 0.0
                return sum(
                    c * polylog(deg.beta + j - 1.0, x) for j, c in enumerate(mand, start=1)
                ) / zb

            def m_dt_xdt(x):
                return float(np.dot(a * karr, x**karr))

            def m_dr_xdt(x):
                return float(np.dot(b - a * karr, x**karr))

    else:  # pragma: no cover - unknown model
        raise TypeError(f"unsupported transmission model {tr!r}")

    return GenFnBundle(
        mean_d=mom.mean_d,
        mean_dr=mom.mean_dr,
        mean_dt=mom.mean_dt,
        g_d=g_d,
        g_dt=g_dt,
        dg_d=dg_d,
        m_dt_xd=m_dt_xd,
        m_dt_xdt=m_dt_xdt,
        m_dr_xdt=m_dr_xdt,
        label=f"law({deg!r}, {tr!r})",
    )


# ---------------------------------------------------------------------------
# The three scalar functions and their roots
# ---------------------------------------------------------------------------


def eval_H(bundle: GenFnBundle, x: float) -> float:
    """H(x) = E[D] x^2 - E[D(r)] x - E[D(t) x^D]; H(1) = 0."""
    if bundle.h is not None:
        return bundle.h(x)
    return bundle.mean_d * x * x - bundle.mean_dr * x - bundle.m_dt_xd(x)


def eval_Hbar(bundle: GenFnBundle, x: float) -> float:
    """Hbar(x) = E[D] x^2 - E[D(t) x^D(t)] - E[D(r) x^D(t)] x; Hbar(1) = 0."""
    if bundle.hbar is not None:
        return bundle.hbar(x)
    return bundle.mean_d * x * x - bundle.m_dt_xdt(x) - bundle.m_dr_xdt(x) * x


def eval_H0(bundle: GenFnBundle, x: float) -> float:
    """H0(x) = E[D] x^2 - x G_D'(x); H0(1) = 0."""
    if bundle.h0 is not None:
        return bundle.h0(x)
    return bundle.mean_d * x * x - x * bundle.dg_d(x)


def find_root(
    f: Callable[[float], float],
    kind: str = "",
    *,
    step: float = _SCAN_STEP,
    residual_tol: float = ROOT_RESIDUAL,
    from_high: bool = True,
) -> Optional[float]:
    """Certified zero of ``f`` in (0, 1), or ``None`` without a sign change.

    Scans at ``step`` resolution starting from 1 - 1e-6 downward (the zero
    nearest to 1; pass ``from_high=False`` to scan upward for the smallest
    zero), then refines the first bracketed sign change with Brent's method
    until |f(root)| <= ``residual_tol``.  The functions handled here vanish
    at both endpoints, so only an interior sign change counts.
    """
    n_steps = int((_SCAN_HI - _SCAN_LO) / step)
    grid = [_SCAN_HI - j * step for j in range(n_steps + 1)]
    tail = [1e-7, 1e-8, 1e-9]
    xs = grid + tail if from_high else tail[::-1] + grid[::-1]

    x_prev = xs[0]
    f_prev = f(x_prev)
    if f_prev == 0.0:
        return x_prev
    for x in xs[1:]:
        fx = f(x)
        if fx == 0.0:
            return x
        if (f_prev > 0) != (fx > 0):
            lo, hi = (x, x_prev) if x < x_prev else (x_prev, x)
            root = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
            res = abs(f(root))
            if res > residual_tol:
                raise RootBracketingError(
                    f"{kind or 'root'} refinement stalled: residual {res:.3g} "
                    f"exceeds {residual_tol:.3g}"
                )
            return float(root)
        x_prev, f_prev = x, fx
    return None


@dataclass(frozen=True)
class AnalyticResult:
    """Conditions, roots, and limiting fractions for one population.

    ``critical`` marks a viral-condition margin within 1e-9 of zero, where
    the limit approximation is uninformative; roots are withheld and
    ``viral_condition`` reports False there so that ``alpha > 0`` iff
    ``viral_condition`` holds throughout.
    """

    viral_condition: bool
    giant_condition: bool
    critical: bool
    margin_viral: float
    margin_giant: float
    xi: Optional[float]
    xi_bar: Optional[float]
    xi0: Optional[float]
    alpha: float
    alpha_bar: float
    alpha0: float

    def to_dict(self) -> dict:
        def _num(v):
            if v is None:
                return None
            if math.isinf(v):
                return "divergent"
            return v

        return {
            "viral_condition": self.viral_condition,
            "giant_condition": self.giant_condition,
            "critical": self.critical,
            "margin_viral": _num(self.margin_viral),
            "margin_giant": _num(self.margin_giant),
            "xi": self.xi,
            "xi_bar": self.xi_bar,
            "xi0": self.xi0,
            "alpha": self.alpha,
            "alpha_bar": self.alpha_bar,
            "alpha0": self.alpha0,
        }


def fractions(
    bundle: GenFnBundle,
    xi: Optional[float],
    xi_bar: Optional[float],
    xi0: Optional[float],
    mom: JointMoments,
) -> AnalyticResult:
    """Assemble the limiting fractions from the roots (zeros when absent)."""
    mv = viral_margin(mom)
    mg = giant_margin(mom)
    critical = math.isfinite(mv) and abs(mv) < CRITICAL_MARGIN
    return AnalyticResult(
        viral_condition=(mv > 0) and not critical,
        giant_condition=(mg > 0) and not (math.isfinite(mg) and abs(mg) < CRITICAL_MARGIN),
        critical=critical,
        margin_viral=mv,
        margin_giant=mg,
        xi=xi,
        xi_bar=xi_bar,
        xi0=xi0,
        alpha=1.0 - bundle.g_d(xi) if xi is not None else 0.0,
        alpha_bar=1.0 - bundle.g_dt(xi_bar) if xi_bar is not None else 0.0,
        alpha0=1.0 - bundle.g_d(xi0) if xi0 is not None else 0.0,
    )


def analyze(source, *, strict: bool = True) -> AnalyticResult:
    """Full analytic evaluation of a law or a degree sample.

    ``strict=True`` (parametric laws) raises :class:`RootBracketingError`
    when a condition holds but the corresponding zero cannot be bracketed;
    ``strict=False`` (noisy samples) reports absent roots as zeros instead.
    """
    mom = source.moments()
    bundle = build_genfns(source)
    mv = viral_margin(mom)
    mg = giant_margin(mom)
    critical = math.isfinite(mv) and abs(mv) < CRITICAL_MARGIN
    xi = xi_bar = xi0 = None
    if mv > 0 and not critical:
        xi = find_root(lambda x: eval_H(bundle, x), "H")
        xi_bar = find_root(lambda x: eval_Hbar(bundle, x), "Hbar")
        if strict and (xi is None or xi_bar is None):
            raise RootBracketingError(
                f"viral condition holds (margin {mv:.3g}) but no zero was bracketed"
            )
    if mg > 0 and not (math.isfinite(mg) and abs(mg) < CRITICAL_MARGIN):
        xi0 = find_root(lambda x: eval_H0(bundle, x), "H0")
        if strict and xi0 is None:
            raise RootBracketingError(
                f"giant condition holds (margin {mg:.3g}) but no zero was bracketed"
            )
    return fractions(bundle, xi, xi_bar, xi0, mom)


def bernoulli_threshold(degree_law) -> float:
    """Critical transmission probability E[D] / (E[D^2] - E[D]).

    Zero when E[D^2] diverges: any positive transmission probability makes
    the campaign viral on such degree distributions.
    """
    m2 = degree_law.mean_square
    if math.isinf(m2):
        return 0.0
    return degree_law.mean / (m2 - degree_law.mean)


# ---------------------------------------------------------------------------
# Size-biased law and branching cross-check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SizeBiasedLaw:
    """Joint law of the (receiver, transmitter) degrees of a reached friend.

    ``matrix[v, w]`` is P{Dr~ = v, Dt~ = w} where the tilde law re-weights
    the population joint pmf p_{v,w} as
    ((v+1) p_{v+1,w} + (w+1) p_{v,w+1}) / E[D].
    """

    matrix: np.ndarray

    @property
    def mean_transmitter(self) -> float:
        w = np.arange(self.matrix.shape[1], dtype=np.float64)
        return float(self.matrix.sum(axis=0) @ w)

    def total(self) -> float:
        return float(self.matrix.sum())


def size_biased_law(joint: JointDegreeLaw) -> SizeBiasedLaw:
    """Materialize the size-biased joint law (finite-support degree laws).

    Raises ``ValueError`` for laws without materialized atoms (power law)
    or with zero mean degree.
    """
    support, weights = joint.degree.atoms()
    dmax = int(support.max())
    mean_trunc = float(np.dot(weights, support))
    if mean_trunc <= 0.0:
        raise ValueError("size-biased law undefined: E[D] = 0")
    p = np.zeros((dmax + 2, dmax + 2))
    for di, wi in zip(support, weights):
        cpmf = joint.transmission.conditional_pmf(int(di))
        for k, q in zip(cpmf.support, cpmf.weights):
            p[int(di) - int(k), int(k)] += wi * q
    v1 = p[1:, :-1] * np.arange(1, dmax + 2)[:, None]  # (v+1) p_{v+1,w}
    w1 = p[:-1, 1:] * np.arange(1, dmax + 2)[None, :]  # (w+1) p_{v,w+1}
    return SizeBiasedLaw((v1 + w1) / mean_trunc)


@dataclass(frozen=True)
class BranchingCheck:
    """Offspring-process view of the exploration from a random pioneer."""

    supercritical: bool
    mean_offspring: float
    p_ext: float
    alpha_bar_bp: float


def branching_crosscheck(joint: JointDegreeLaw) -> BranchingCheck:
    """Extinction analysis of the offspring approximation.

    The offspring count of a reached friend is the size-biased transmitter
    degree; the process survives iff its mean exceeds one (equivalent to
    the viral condition), the extinction probability is the smallest zero
    of Hbar in (0, 1), and 1 - G_Dt(p_ext) reproduces alpha_bar.  The
    smallest zero is located by an upward scan and checked against the
    downward (nearest-to-1) zero; a mismatch would contradict uniqueness
    and raises.
    """
    mom = joint.moments()
    try:
        mean_off = size_biased_law(joint).mean_transmitter
    except ValueError:
        # Heavy-tailed laws: E[Dt~] = (E[Dt D] - E[Dt]) / E[D], possibly inf.
        mean_off = (
            math.inf
            if math.isinf(mom.mean_dt_d)
            else (mom.mean_dt_d - mom.mean_dt) / mom.mean_d
        )
    margin = (mean_off - 1.0) * mom.mean_d if math.isfinite(mean_off) else math.inf
    supercritical = margin > CRITICAL_MARGIN
    if not supercritical:
        return BranchingCheck(False, mean_off, 1.0, 0.0)
    bundle = build_genfns(joint)
    hbar = lambda x: eval_Hbar(bundle, x)  # noqa: E731
    p_ext = find_root(hbar, "Hbar", from_high=False)
    xi_bar = find_root(hbar, "Hbar", from_high=True)
    if p_ext is None or xi_bar is None:
        raise RootBracketingError("offspring process supercritical but Hbar has no bracketed zero")
    if abs(p_ext - xi_bar) > 1e-9:
        raise RuntimeError(
            f"Hbar zero not unique in (0,1): smallest {p_ext}, nearest-to-1 {xi_bar}"
        )
    return BranchingCheck(True, mean_off, p_ext, 1.0 - bundle.g_dt(p_ext))
