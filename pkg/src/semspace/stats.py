"""Shared statistics kit: Pearson correlation, paired t-test, Shannon
entropy.

The arithmetic is written out directly; only the t-distribution CDF comes
from scipy.  Zero-variance inputs yield explicit degenerate results instead
of NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.stats import t as t_dist

from .errors import InputError


@dataclass(frozen=True)
class PearsonResult:
    r: float
    n: int
    p: float
    degenerate: bool = False

    def to_jsonable(self) -> dict:
        return {"r": self.r, "n": self.n, "p": self.p, "degenerate": self.degenerate}


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float
    degenerate: bool = False

    def to_jsonable(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p, "degenerate": self.degenerate}


def _two_tailed_p(t_stat: float, df: int) -> float:
    if math.isinf(t_stat):
        return 0.0
    return float(2.0 * t_dist.sf(abs(t_stat), df))


def pearson(x: Sequence[float], y: Sequence[float]) -> PearsonResult:
    """Pearson product-moment correlation with a two-tailed p-value from the
    t-distribution (df = n - 2)."""
    if len(x) != len(y):
        raise InputError(f"pearson: length mismatch ({len(x)} vs {len(y)})")
    n = len(x)
    if n < 3:
        raise InputError(f"pearson: need at least 3 observations, got {n}")
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        return PearsonResult(r=0.0, n=n, p=1.0, degenerate=True)
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return PearsonResult(r=r, n=n, p=0.0)
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    return PearsonResult(r=r, n=n, p=_two_tailed_p(t_stat, n - 2))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Paired Student t-test, two-tailed.

    Identical samples give t = 0, p = 1.  Zero variance of the differences
    with a nonzero mean gives an infinite t and p = 0, flagged degenerate.
    """
    if len(a) != len(b):
        raise InputError(f"paired_t_test: length mismatch ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise InputError(f"paired_t_test: need at least 2 pairs, got {n}")
    d = [x - y for x, y in zip(a, b)]
    mean_d = sum(d) / n
    var_d = sum((v - mean_d) ** 2 for v in d) / (n - 1)
    df = n - 1
    if var_d == 0.0:
        if mean_d == 0.0:
            return TTestResult(t=0.0, df=df, p=1.0, degenerate=True)
        return TTestResult(
            t=math.copysign(math.inf, mean_d), df=df, p=0.0, degenerate=True
        )
    t_stat = mean_d / math.sqrt(var_d / n)
    return TTestResult(t=t_stat, df=df, p=_two_tailed_p(t_stat, df))


def shannon_entropy(probs: Sequence[float]) -> float:
    """Shannon entropy in bits of a probability distribution.

    Probabilities must be nonnegative and sum to 1 (tolerance 1e-9);
    zero-probability entries contribute nothing.
    """
    if not probs:
        raise InputError("shannon_entropy: empty distribution")
    if any(p < 0 for p in probs):
        raise InputError("shannon_entropy: negative probability")
    total = sum(probs)
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"shannon_entropy: probabilities sum to {total}, not 1")
    return -sum(p * math.log2(p) for p in probs if p > 0)
