"""Campaign evaluation from pioneer data alone.

Given the (degree, transmitter degree) pairs collected from the initially
contacted pioneers, and no further knowledge of the network, decide in
three stages whether the campaign is worth pursuing:

1. fragmentation: is E[D^2 - 2D] sharply positive?  Otherwise the network
   has no linear-size connected component and nothing can go viral.
2. effectiveness: is E[D D(t) - D - D(t)] sharply positive?  This is the
   viral condition for the ongoing campaign.
3. plug-in fractions: zeros of the estimated H and Hbar give the expected
   influenced fraction and the chance that a random pioneer is good.

"Sharply positive" is a one-sided z-test at a configurable confidence
multiplier (default z = 2.33, about 99%).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import build_genfns, eval_H, eval_Hbar, find_root
from .populations import DegreeSample

__all__ = [
    "ConditionTest",
    "FractionEstimates",
    "EvalConfig",
    "EstimationReport",
    "fragmentation_test",
    "effectiveness_test",
    "estimate_fractions",
    "evaluate_campaign",
    "load_sample_csv",
    "write_sample_csv",
]

DEFAULT_Z = 2.33

CSV_HEADER = ["degree", "transmitter_degree"]


@dataclass(frozen=True)
class ConditionTest:
    """One-sided test of a moment being sharply positive."""

    stat: float
    stderr: float
    z: float

    @property
    def passed(self) -> bool:
        return self.stat - self.z * self.stderr > 0.0


def _mean_test(values: np.ndarray, z: float) -> ConditionTest:
    n = values.size
    if n < 2:
        raise ValueError("need at least two pioneers")
    stderr = float(values.std(ddof=1)) / math.sqrt(n)
    return ConditionTest(stat=float(values.mean()), stderr=stderr, z=z)


def fragmentation_test(sample: DegreeSample, z: float = DEFAULT_Z) -> ConditionTest:
    """Estimate E[D^2 - 2D] = E[D(D-2)] from the pioneer degrees."""
    d = sample.degree.astype(np.float64)
    return _mean_test(d * d - 2.0 * d, z)


def effectiveness_test(sample: DegreeSample, z: float = DEFAULT_Z) -> ConditionTest:
    """Estimate E[D D(t) - D - D(t)], the viral-condition margin."""
    d = sample.degree.astype(np.float64)
    t = sample.transmitter_degree.astype(np.float64)
    return _mean_test(d * t - d - t, z)


@dataclass(frozen=True)
class FractionEstimates:
    """Plug-in roots and fractions; ``None`` roots mean no sign change."""

    xi_hat: Optional[float]
    xi_bar_hat: Optional[float]
    alpha_hat: float
    alpha_bar_hat: float

    @property
    def found(self) -> bool:
        return self.xi_hat is not None and self.xi_bar_hat is not None


def estimate_fractions(sample: DegreeSample) -> FractionEstimates:
    """Zeros of the estimated H and Hbar, plugged into the fraction formulas.

    Never raises on an undersized or subcritical-looking sample: when an
    estimated function has no certified sign change in (0, 1) the root is
    reported absent and the fraction as zero.
    """
    bundle = build_genfns(sample)
    xi = find_root(lambda x: eval_H(bundle, x), "H")
    xi_bar = find_root(lambda x: eval_Hbar(bundle, x), "Hbar")
    return FractionEstimates(
        xi_hat=xi,
        xi_bar_hat=xi_bar,
        alpha_hat=1.0 - bundle.g_d(xi) if xi is not None else 0.0,
        alpha_bar_hat=1.0 - bundle.g_dt(xi_bar) if xi_bar is not None else 0.0,
    )


@dataclass(frozen=True)
class EvalConfig:
    """Knobs for the campaign decision procedure."""

    z: float = DEFAULT_Z
    cost_per_pioneer: Optional[float] = None
    value_per_influenced: Optional[float] = None
    success_horizon: int = 10


@dataclass(frozen=True)
class EstimationReport:
    """Outcome of the staged campaign evaluation.

    ``verdict``: "fragmented" (no giant component), "ineffective" (viral
    condition fails), "viable" (both pass, fractions estimated), or
    "inconclusive" (conditions pass but the plug-in roots were not found,
    e.g. on an undersized sample).
    """

    n_samples: int
    frag_stat: float
    frag_stderr: float
    eff_stat: float
    eff_stderr: float
    z: float
    verdict: str
    xi_hat: Optional[float] = None
    xi_bar_hat: Optional[float] = None
    alpha_hat: float = 0.0
    alpha_bar_hat: float = 0.0
    expected_tries: Optional[float] = None
    success_after: Optional[list[float]] = None
    expected_cost_to_viral: Optional[float] = None
    value_rate_per_member: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "fragmentation": {"stat": self.frag_stat, "stderr": self.frag_stderr},
            "effectiveness": {"stat": self.eff_stat, "stderr": self.eff_stderr},
            "z": self.z,
            "verdict": self.verdict,
            "xi_hat": self.xi_hat,
            "xi_bar_hat": self.xi_bar_hat,
            "alpha_hat": self.alpha_hat,
            "alpha_bar_hat": self.alpha_bar_hat,
            "expected_tries": self.expected_tries,
            "success_after": self.success_after,
            "expected_cost_to_viral": self.expected_cost_to_viral,
            "value_rate_per_member": self.value_rate_per_member,
        }


def evaluate_campaign(sample: DegreeSample, config: EvalConfig = EvalConfig()) -> EstimationReport:
    """Run fragmentation -> effectiveness -> fraction estimation in order.

    Short-circuits to the corresponding verdict when a stage fails.  A
    viable campaign also reports the expected number of uniformly random
    pioneer picks until a good one (1 / alpha_bar) and the geometrically
    growing success probability after k tries, 1 - (1 - alpha_bar)^k.
    """
    frag = fragmentation_test(sample, config.z)
    eff = effectiveness_test(sample, config.z)
    base = dict(
        n_samples=len(sample),
        frag_stat=frag.stat,
        frag_stderr=frag.stderr,
        eff_stat=eff.stat,
        eff_stderr=eff.stderr,
        z=config.z,
    )
    if not frag.passed:
        return EstimationReport(verdict="fragmented", **base)
    if not eff.passed:
        return EstimationReport(verdict="ineffective", **base)
    est = estimate_fractions(sample)
    if not est.found or est.alpha_bar_hat <= 0.0:
        return EstimationReport(
            verdict="inconclusive",
            xi_hat=est.xi_hat,
            xi_bar_hat=est.xi_bar_hat,
            alpha_hat=est.alpha_hat,
            alpha_bar_hat=est.alpha_bar_hat,
            **base,
        )
    tries = 1.0 / est.alpha_bar_hat
    curve = [
        1.0 - (1.0 - est.alpha_bar_hat) ** k for k in range(1, config.success_horizon + 1)
    ]
    cost = config.cost_per_pioneer * tries if config.cost_per_pioneer is not None else None
    value = (
        config.value_per_influenced * est.alpha_hat
        if config.value_per_influenced is not None
        else None
    )
    return EstimationReport(
        verdict="viable",
        xi_hat=est.xi_hat,
        xi_bar_hat=est.xi_bar_hat,
        alpha_hat=est.alpha_hat,
        alpha_bar_hat=est.alpha_bar_hat,
        expected_tries=tries,
        success_after=curve,
        expected_cost_to_viral=cost,
        value_rate_per_member=value,
        **base,
    )


def load_sample_csv(path) -> DegreeSample:
    """Read pioneer rows from a "degree,transmitter_degree" CSV.

    Malformed rows (non-integers, negatives, transmitter degree exceeding
    the degree) are all reported with their 1-based line numbers.
    """
    degrees: list[int] = []
    transmitters: list[int] = []
    errors: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != CSV_HEADER:
            raise ValueError(
                f"{path}: expected header '{','.join(CSV_HEADER)}', got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                errors.append(f"line {lineno}: expected 2 fields, got {len(row)}")
                continue
            try:
                d, t = int(row[0]), int(row[1])
            except ValueError:
                errors.append(f"line {lineno}: non-integer value in {row}")
                continue
            if d < 0 or t < 0:
                errors.append(f"line {lineno}: negative degree in {row}")
            elif t > d:
                errors.append(f"line {lineno}: transmitter_degree {t} exceeds degree {d}")
            else:
                degrees.append(d)
                transmitters.append(t)
    if errors:
        raise ValueError(f"{path}: rejected rows:\n" + "\n".join(errors))
    if not degrees:
        raise ValueError(f"{path}: no data rows")
    return DegreeSample(np.array(degrees), np.array(transmitters))


def write_sample_csv(sample: DegreeSample, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for d, t in zip(sample.degree, sample.transmitter_degree):
            writer.writerow([int(d), int(t)])
