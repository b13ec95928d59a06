"""Degree distributions, transmission models, and their joint law.

A population is described by the joint distribution of a member's total
degree D and transmitter degree D(t) <= D: a named degree law (Poisson,
power law, or empirical) composed with a transmission model giving the
conditional law of D(t) given D.  The module supplies exact conditional
pmfs, analytic moments (with ``inf`` marking divergence), and i.i.d.
samplers driven by an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats as _st

from .special import (
    DEFAULT_TAIL_MASS,
    DiscretePmf,
    poisson_pmf,
    stirling2,
    zeta,
    zipf_pmf,
    zipf_tail_cutoff,
    polylog,
)

__all__ = [
    "DegreeSample",
    "JointMoments",
    "PoissonDegree",
    "PowerLawDegree",
    "EmpiricalDegree",
    "BernoulliTransmission",
    "NodePercolation",
    "CouponCollector",
    "JointDegreeLaw",
    "conditional_transmitter_pmf",
    "sample_joint",
    "moments",
]


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class DegreeSample:
    """Observed pairs (degree, transmitter degree), one row per member."""

    degree: np.ndarray
    transmitter_degree: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.degree, dtype=np.int64)
        t = np.asarray(self.transmitter_degree, dtype=np.int64)
        if d.ndim != 1 or t.shape != d.shape:
            raise ValueError("degree and transmitter_degree must be 1-d arrays of equal length")
        if d.size == 0:
            raise ValueError("empty sample")
        if d.min() < 0 or t.min() < 0:
            raise ValueError("degrees must be non-negative")
        if np.any(t > d):
            bad = np.nonzero(t > d)[0]
            raise ValueError(f"transmitter degree exceeds degree at rows {bad[:10].tolist()}")
        object.__setattr__(self, "degree", d)
        object.__setattr__(self, "transmitter_degree", t)

    def __len__(self) -> int:
        return int(self.degree.size)

    def moments(self) -> "JointMoments":
        d = self.degree.astype(np.float64)
        t = self.transmitter_degree.astype(np.float64)
        return JointMoments(
            mean_d=float(d.mean()),
            mean_d2=float((d * d).mean()),
            mean_dt=float(t.mean()),
            mean_dt_d=float((d * t).mean()),
            mean_dr=float((d - t).mean()),
        )


@dataclass(frozen=True)
class JointMoments:
    """First and mixed moments of (D, D(t)); ``inf`` marks a divergent moment."""

    mean_d: float
    mean_d2: float
    mean_dt: float
    mean_dt_d: float
    mean_dr: float

    @property
    def d2_divergent(self) -> bool:
        return math.isinf(self.mean_d2)


# ---------------------------------------------------------------------------
# Degree laws
# ---------------------------------------------------------------------------


class PoissonDegree:
    """Poisson(lam) total degree."""

    kind = "poisson"

    def __init__(self, lam: float):
        if lam <= 0:
            raise ValueError("Poisson degree requires lam > 0")
        self.lam = float(lam)

    @cached_property
    def _pmf(self) -> DiscretePmf:
        return poisson_pmf(self.lam)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """Materialized (support, weights); tail mass below 1e-12."""
        return self._pmf.support, self._pmf.weights

    @property
    def mean(self) -> float:
        return self.lam

    @property
    def mean_square(self) -> float:
        return self.lam * self.lam + self.lam

    def pgf(self, x: float) -> float:
        return math.exp(self.lam * (x - 1.0))

    def pgf_prime(self, x: float) -> float:
        return self.lam * math.exp(self.lam * (x - 1.0))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.poisson(self.lam, n).astype(np.int64)

    def __repr__(self):
        return f"PoissonDegree(lam={self.lam})"


class PowerLawDegree:
    """Power-law ("zipf") degree: P{D=k} = k**-beta / zeta(beta), k >= 1.

    Requires beta > 2 so the mean is finite.  The second moment is infinite
    for beta <= 3 and reported as ``inf``.  Generating functions use the
    polylogarithm rather than a materialized pmf: truncating the tail to
    1e-12 would need ~1e8 atoms already at beta = 2.45.
    """

    kind = "powerlaw"

    #: Inverse-CDF sampling table size; draws beyond it extend on the fly.
    _TABLE = 1 << 20

    def __init__(self, beta: float):
        if beta <= 2.0:
            raise ValueError("power-law degree requires beta > 2 (finite mean)")
        self.beta = float(beta)
        self._zeta = zeta(beta)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        raise ValueError(
            f"power-law degree (beta={self.beta}) has no materialized atoms; "
            "use its closed-form generating functions"
        )

    def pmf(self, tail_mass: float = 1e-9, max_atoms: int = 20_000_000) -> DiscretePmf:
        """Materialize a truncated pmf when the tail permits (testing aid)."""
        return zipf_pmf(self.beta, tail_mass, max_atoms)

    @property
    def mean(self) -> float:
        return zeta(self.beta - 1.0) / self._zeta

    @property
    def mean_square(self) -> float:
        if self.beta <= 3.0:
            return math.inf
        return zeta(self.beta - 2.0) / self._zeta

    def pgf(self, x: float) -> float:
        return polylog(self.beta, x) / self._zeta

    def pgf_prime(self, x: float) -> float:
        if x == 0.0:
            return 1.0 / self._zeta  # P{D=1}
        return polylog(self.beta - 1.0, x) / (x * self._zeta)

    def neg_moment(self, r: int) -> float:
        """E[D**-r] for integer r >= -1 (r = -1 is the mean)."""
        if r == -1:
            return self.mean
        if r < -1:
            raise ValueError("only E[D**-r] with r >= -1 is finite for all beta > 2")
        return zeta(self.beta + r) / self._zeta if r > 0 else 1.0

    @cached_property
    def _cdf_table(self) -> np.ndarray:
        k = np.arange(1, self._TABLE + 1, dtype=np.float64)
        return np.cumsum(k ** (-self.beta)) / self._zeta

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF sampling on the pmf truncated at tail mass 1e-12."""
        u = rng.random(n)
        out = np.searchsorted(self._cdf_table, u, side="right") + 1
        high = out > self._TABLE
        if np.any(high):
            cutoff = zipf_tail_cutoff(self.beta, DEFAULT_TAIL_MASS)
            for i in np.nonzero(high)[0]:
                out[i] = self._extend_quantile(float(u[i]), cutoff)
        return out.astype(np.int64)

    def _extend_quantile(self, u: float, cutoff: int) -> int:
        total = float(self._cdf_table[-1])
        k0 = self._TABLE + 1
        chunk = self._TABLE
        while k0 <= cutoff:
            hi = min(k0 + chunk - 1, cutoff)
            k = np.arange(k0, hi + 1, dtype=np.float64)
            cdf = total + np.cumsum(k ** (-self.beta)) / self._zeta
            j = np.searchsorted(cdf, u, side="right")
            if j < cdf.size:
                return k0 + int(j)
            total = float(cdf[-1])
            k0 = hi + 1
            chunk *= 2
        return cutoff  # mass beyond the truncation point (< 1e-12) clamps

    def __repr__(self):
        return f"PowerLawDegree(beta={self.beta})"


class EmpiricalDegree:
    """Degree law read off a finite pmf or a raw list of observed degrees."""

    kind = "empirical"

    def __init__(self, pmf: DiscretePmf):
        self._pmf_obj = pmf

    @classmethod
    def from_degrees(cls, degrees) -> "EmpiricalDegree":
        d = np.asarray(degrees, dtype=np.int64)
        if d.size == 0:
            raise ValueError("empty degree list")
        if d.min() < 0:
            raise ValueError("degrees must be non-negative")
        counts = np.bincount(d)
        support = np.nonzero(counts)[0]
        return cls(DiscretePmf(support, counts[support] / d.size))

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return self._pmf_obj.support, self._pmf_obj.weights

    @property
    def mean(self) -> float:
        return self._pmf_obj.mean()

    @property
    def mean_square(self) -> float:
        return self._pmf_obj.moment(2)

    def pgf(self, x: float) -> float:
        return float(np.dot(self._pmf_obj.weights, np.asarray(x) ** self._pmf_obj.support))

    def pgf_prime(self, x: float) -> float:
        k = self._pmf_obj.support
        w = self._pmf_obj.weights
        pos = k >= 1
        return float(np.dot(w[pos] * k[pos], np.asarray(x) ** (k[pos] - 1)))

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self._pmf_obj.weights)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = np.searchsorted(self._cdf, rng.random(n), side="right")
        idx = np.minimum(idx, self._pmf_obj.support.size - 1)
        return self._pmf_obj.support[idx].astype(np.int64)

    def __repr__(self):
        return f"EmpiricalDegree({self._pmf_obj.support.size} atoms)"


# ---------------------------------------------------------------------------
# Transmission models
# ---------------------------------------------------------------------------


class BernoulliTransmission:
    """Each friend is independently influenced with probability p."""

    kind = "bernoulli"

    def __init__(self, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError("transmission probability must lie in [0, 1]")
        self.p = float(p)

    def conditional_pmf(self, d: int) -> DiscretePmf:
        """Binomial(d, p) law of the transmitter degree."""
        if d < 0:
            raise ValueError("degree must be non-negative")
        k = np.arange(d + 1)
        return DiscretePmf(k, _st.binom.pmf(k, d, self.p))

    def sample_given(self, d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.binomial(d, self.p).astype(np.int64)

    def mean_t(self, d):
        return self.p * np.asarray(d, dtype=np.float64)

    def __repr__(self):
        return f"BernoulliTransmission(p={self.p})"


class NodePercolation:
    """Enthusiastic/apathetic members: transmit to all friends w.p. p, else none."""

    kind = "nodeperc"

    def __init__(self, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError("transmission probability must lie in [0, 1]")
        self.p = float(p)

    def conditional_pmf(self, d: int) -> DiscretePmf:
        if d < 0:
            raise ValueError("degree must be non-negative")
        if d == 0 or self.p == 1.0:
            return DiscretePmf(np.array([d]), np.array([1.0]))
        if self.p == 0.0:
            return DiscretePmf(np.array([0]), np.array([1.0]))
        return DiscretePmf(np.array([0, d]), np.array([1.0 - self.p, self.p]))

    def sample_given(self, d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        on = rng.random(d.size) < self.p
        return (d * on).astype(np.int64)

    def mean_t(self, d):
        return self.p * np.asarray(d, dtype=np.float64)

    def __repr__(self):
        return f"NodePercolation(p={self.p})"


class CouponCollector:
    """K uniform friend selections with replacement; D(t) counts distinct picks.

    The conditional law of D(t) given D = d is the occupancy distribution
    P{k} = d!/(d-k)! * {K over k} / d**K (an isolated member, d = 0, has
    D(t) = 0 for any K).
    """

    kind = "coupon"

    def __init__(self, K: int):
        if K < 0 or int(K) != K:
            raise ValueError("coupon count K must be a non-negative integer")
        self.K = int(K)

    def conditional_pmf(self, d: int) -> DiscretePmf:
        if d < 0:
            raise ValueError("degree must be non-negative")
        if d == 0 or self.K == 0:
            return DiscretePmf(np.array([0]), np.array([1.0]))
        kmax = min(d, self.K)
        ks = np.arange(1, kmax + 1)
        den = d**self.K  # exact integers; one rounding at the division
        weights = np.empty(kmax, dtype=np.float64)
        falling = 1
        for k in range(1, kmax + 1):
            falling *= d - (k - 1)
            weights[k - 1] = (falling * stirling2(self.K, k)) / den
        return DiscretePmf(ks, weights)

    def sample_given(self, d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros(d.size, dtype=np.int64)
        if self.K == 0:
            return out
        pos = np.nonzero(d > 0)[0]
        if pos.size == 0:
            return out
        draws = np.floor(rng.random((pos.size, self.K)) * d[pos, None]).astype(np.int64)
        if self.K == 1:
            out[pos] = 1
        else:
            draws.sort(axis=1)
            out[pos] = 1 + (np.diff(draws, axis=1) > 0).sum(axis=1)
        return out

    def mean_t(self, d):
        """E[D(t) | D = d] = d * (1 - (1 - 1/d)**K), vectorized."""
        d = np.asarray(d, dtype=np.float64)
        out = np.zeros_like(d)
        if self.K == 0:
            return out
        out[d == 1.0] = 1.0
        pos = d > 1.0
        # -d * expm1(K * log1p(-1/d)) avoids cancellation at large d
        out[pos] = -d[pos] * np.expm1(self.K * np.log1p(-1.0 / d[pos]))
        return out

    def __repr__(self):
        return f"CouponCollector(K={self.K})"


def conditional_transmitter_pmf(model, d: int) -> DiscretePmf:
    """Law of the transmitter degree given total degree ``d``."""
    return model.conditional_pmf(d)


# ---------------------------------------------------------------------------
# Joint law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointDegreeLaw:
    """Degree law composed with a transmission model."""

    degree: object
    transmission: object

    def sample(self, n: int, seed) -> DegreeSample:
        """n i.i.d. (D, D(t)) pairs; deterministic for a given seed."""
        if n < 1:
            raise ValueError("sample size must be positive")
        rng = _as_rng(seed)
        d = self.degree.sample(n, rng)
        t = self.transmission.sample_given(d, rng)
        return DegreeSample(d, t)

    def moments(self) -> JointMoments:
        deg, tr = self.degree, self.transmission
        mean_d = deg.mean
        mean_d2 = deg.mean_square
        if tr.kind in ("bernoulli", "nodeperc"):
            p = tr.p
            mean_dt = p * mean_d
            mean_dt_d = 0.0 if p == 0.0 else p * mean_d2
        elif tr.kind == "coupon":
            mean_dt, mean_dt_d = self._coupon_moments()
        else:  # pragma: no cover - unknown model
            raise TypeError(f"unsupported transmission model {tr!r}")
        return JointMoments(
            mean_d=mean_d,
            mean_d2=mean_d2,
            mean_dt=mean_dt,
            mean_dt_d=mean_dt_d,
            mean_dr=mean_d - mean_dt,
        )

    def _coupon_moments(self) -> tuple[float, float]:
        tr, deg = self.transmission, self.degree
        if isinstance(deg, PowerLawDegree):
            # d(1-(1-1/d)**K) = sum_j (-1)**(j+1) C(K,j) d**(1-j) turns the
            # coupon moments into exact zeta ratios.
            mean_dt = 0.0
            mean_dt_d = 0.0
            for j in range(1, tr.K + 1):
                c = (-1.0) ** (j + 1) * math.comb(tr.K, j)
                mean_dt += c * deg.neg_moment(j - 1)
                mean_dt_d += c * deg.neg_moment(j - 2)
            return mean_dt, mean_dt_d
        support, weights = deg.atoms()
        mt = tr.mean_t(support)
        return float(np.dot(weights, mt)), float(np.dot(weights, support * mt))

    def __repr__(self):
        return f"JointDegreeLaw({self.degree!r}, {self.transmission!r})"


def sample_joint(law: JointDegreeLaw, n: int, seed) -> DegreeSample:
    """Draw ``n`` i.i.d. (D, D(t)) pairs from the joint law."""
    return law.sample(n, seed)


def moments(law: JointDegreeLaw) -> JointMoments:
    """Analytic moments of the joint law (``inf`` marks divergence)."""
    return law.moments()
