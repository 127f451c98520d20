"""Closed-form security calculators, brute-force concealing oracle, and the
security-parameter solver.

The per-slot comparison probabilities are computed in exact rational
arithmetic; the concealing advantage at realistic parameters involves
quantities like (1 - 3e-8)^70 and is therefore evaluated with
log1p/expm1 to avoid catastrophic cancellation.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import optics
from .errors import InfeasibleTargetError, ParameterError


@dataclass(frozen=True)
class ComparisonProbs:
    """Per-slot probabilities of the comparison channel (exact rationals).

    p        -- Bob confirms the bits matched (D1 click or inferred D2)
    p_prime  -- Bob guesses Alice's bit correctly, counting D0-based guesses
    q        -- Alice learns that Bob confirmed (her D2 clicked)
    posterior_neq_given_d0 -- P(bits differed | D0 clicked)
    """

    p: Fraction
    p_prime: Fraction
    q: Fraction
    posterior_neq_given_d0: Fraction


def comparison_probs(bs: optics.BeamSplitter) -> ComparisonProbs:
    """Exact per-slot channel probabilities for a given beam splitter.

    Degenerate mirrors (r in {0, 1}) break the required ordering
    0 <= q < p < 1 and are rejected.
    """
    if not 0.0 < bs.r < 1.0:
        raise ParameterError("degenerate beam splitter: need 0 < r < 1")
    r = Fraction(bs.r)
    t = Fraction(bs.t)
    p = (r * t + t) / 2
    q = t / 2
    # On a D0 click Bob bets the bits differed; that guess is right on the
    # whole mismatched mass, adding 1/2 on top of his confirmed slots.
    p_prime = p + Fraction(1, 2)
    posterior = 1 / (1 + r * r)
    assert 0 <= q < p < p_prime < 1
    return ComparisonProbs(p=p, p_prime=p_prime, q=q,
                           posterior_neq_given_d0=posterior)


def binding_advantage(m: int, p, q):
    """Alice's probability of opening the opposite bit undetected.

    One flipped bit per sequence survives with (1-p)/(1-q); m sequences
    compound the exponent. Accepts floats or Fractions; preserves exact
    arithmetic for Fraction inputs.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    if not 0 <= q < p < 1:
        raise ParameterError("need 0 <= q < p < 1")
    return ((1 - p) / (1 - q)) ** m


@dataclass(frozen=True)
class ConcealingReport:
    """Bob's concealing-break probability and its stable evaluation.

    first_order is the small-epsilon approximation m * p'^n / 2. The
    source analysis simplifies the exact advantage to m * p'^n, dropping
    the factor 1/2; the exact expression is what matches the quoted
    ~1.0e-6 figure, so the discrepancy is flagged here rather than
    silently reconciled.
    """

    epsilon: float
    advantage: float
    first_order: float
    factor_two_note: str = (
        "final simplification in the source analysis omits the factor 1/2; "
        "exact advantage = epsilon/2 is reported here"
    )


def concealing_advantage(m: int, n: int, p_prime) -> ConcealingReport:
    """epsilon = 1 - (1 - p'^n)^m and Bob's guessing advantage epsilon/2."""
    if m < 1 or n < 1:
        raise ParameterError("m and n must be >= 1")
    pp = float(p_prime)
    if not 0.0 < pp < 1.0:
        raise ParameterError("need 0 < p' < 1")
    log_ppn = n * math.log(pp)
    ppn = math.exp(log_ppn)
    # 1 - (1 - x)^m with x = p'^n, evaluated without cancellation.
    epsilon = -math.expm1(m * math.log1p(-ppn))
    return ConcealingReport(
        epsilon=epsilon,
        advantage=epsilon / 2.0,
        first_order=m * ppn / 2.0,
    )


@dataclass
class ParamSearchResult:
    m: int
    n: int
    binding: float
    concealing: float
    trace: list = field(default_factory=list)  # (parameter, value, bound) rows

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "binding_advantage": self.binding,
            "concealing_advantage": self.concealing,
            "trace": [
                {"parameter": p, "value": v, "advantage": a}
                for p, v, a in self.trace
            ],
        }


def choose_parameters(
    target_binding: float,
    target_concealing: float,
    bs: Optional[optics.BeamSplitter] = None,
    max_m: int = 100_000,
    max_n: int = 1_000_000,
) -> ParamSearchResult:
    """Smallest m meeting the binding target, then smallest n >= 2 meeting
    the concealing target at that m. Both advantages are monotone in their
    parameter, so the linear scans return the minimal pair."""
    if not (0.0 < target_binding <= 1.0 and 0.0 < target_concealing <= 1.0):
        raise ParameterError("targets must lie in (0, 1]")
    bs = bs or optics.BeamSplitter.balanced()
    probs = comparison_probs(bs)
    p, q, pp = float(probs.p), float(probs.q), float(probs.p_prime)

    trace: list = []
    m = None
    for cand in range(1, max_m + 1):
        adv = binding_advantage(cand, p, q)
        trace.append(("m", cand, adv))
        if adv <= target_binding:
            m = cand
            break
    if m is None:
        raise InfeasibleTargetError(
            f"binding target {target_binding} unreachable with m <= {max_m}"
        )

    n = None
    for cand in range(2, max_n + 1):
        adv = concealing_advantage(m, cand, pp).advantage
        trace.append(("n", cand, adv))
        if adv <= target_concealing:
            n = cand
            break
    if n is None:
        raise InfeasibleTargetError(
            f"concealing target {target_concealing} unreachable with n <= {max_n}"
        )

    return ParamSearchResult(
        m=m,
        n=n,
        binding=binding_advantage(m, p, q),
        concealing=concealing_advantage(m, n, pp).advantage,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# Concealing oracle: exact enumeration of Bob's classical view at tiny n
# ---------------------------------------------------------------------------

Channel = Callable[[int, int], tuple[float, float, float]]
"""Per-slot outcome probabilities (P_D0, P_D1, P_D2) given (a_bit, b_bit)."""


def default_channel(bs: optics.BeamSplitter) -> Channel:
    def channel(a_bit: int, b_bit: int) -> tuple[float, float, float]:
        dist = optics.outcome_distribution(a_bit, b_bit, bs)
        return (dist[optics.Detector.D0], dist[optics.Detector.D1],
                dist[optics.Detector.D2])
    return channel


def perfect_channel(a_bit: int, b_bit: int) -> tuple[float, float, float]:
    """Hypothetical fully distinguishing channel: disjoint, certain outcomes."""
    return (1.0, 0.0, 0.0) if a_bit != b_bit else (0.0, 0.0, 1.0)


def _view_distribution(n: int, b_commit: int, channel: Channel) -> dict:
    """Exact distribution of Bob's full view (his bits + per-slot click
    record, with no-click read as a D2 event) for a given committed bit."""
    dist: dict = defaultdict(float)
    a_weight = 1.0 / 2 ** (n - 1)
    b_weight = 1.0 / 2 ** n
    for b_str in itertools.product((0, 1), repeat=n):
        for a_str in itertools.product((0, 1), repeat=n):
            if np.bitwise_xor.reduce(a_str) != b_commit:
                continue
            slot_probs = [channel(a, b) for a, b in zip(a_str, b_str)]
            for outcome in itertools.product((0, 1, 2), repeat=n):
                prob = a_weight * b_weight
                for j, o in enumerate(outcome):
                    prob *= slot_probs[j][o]
                if prob > 0.0:
                    dist[(b_str, outcome)] += prob
    return dist


def concealing_oracle_bruteforce(
    n: int,
    bs: Optional[optics.BeamSplitter] = None,
    channel: Optional[Channel] = None,
) -> float:
    """Exact total-variation distance between Bob's view distributions
    conditioned on the two commitment values, by full enumeration."""
    if not 2 <= n <= 4:
        raise ParameterError("brute-force oracle supports 2 <= n <= 4 only")
    if channel is None:
        channel = default_channel(bs or optics.BeamSplitter.balanced())
    d0 = _view_distribution(n, 0, channel)
    d1 = _view_distribution(n, 1, channel)
    keys = set(d0) | set(d1)
    return 0.5 * sum(abs(d0.get(k, 0.0) - d1.get(k, 0.0)) for k in keys)


def concealing_tv_monte_carlo(
    n: int,
    bs: optics.BeamSplitter,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of the oracle's TV distance from sampled
    transcripts (`samples` per commitment value)."""
    if n > 12:
        raise ParameterError("view space too large for bucketed estimation")
    n_views = 6 ** n  # (b_bit, outcome) in {0,1} x {0,1,2} per slot
    counts = np.zeros((2, n_views), dtype=np.int64)
    weights = 6 ** np.arange(n, dtype=np.int64)
    for b_commit in (0, 1):
        bits = rng.integers(0, 2, size=(samples, n), dtype=np.uint8)
        parity = np.bitwise_xor.reduce(bits[:, :-1], axis=1)
        bits[:, -1] = parity ^ b_commit
        b_bits = rng.integers(0, 2, size=(samples, n), dtype=np.uint8)
        det = optics.sample_detectors(bits == b_bits, bs, rng)
        codes = (b_bits.astype(np.int64) * 3 + det) @ weights
        counts[b_commit] = np.bincount(codes, minlength=n_views)
    freq = counts / samples
    return 0.5 * float(np.abs(freq[0] - freq[1]).sum())


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

@dataclass
class SecurityReport:
    """Analytic security summary for one (m, n, beam splitter) choice."""

    m: int
    n: int
    r: float
    t: float
    p: float
    p_prime: float
    q: float
    binding: float
    concealing: ConcealingReport

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "t": self.t,
            "p": self.p,
            "p_prime": self.p_prime,
            "q": self.q,
            "binding_advantage": self.binding,
            "concealing": {
                "epsilon": self.concealing.epsilon,
                "advantage": self.concealing.advantage,
                "first_order": self.concealing.first_order,
                "note": self.concealing.factor_two_note,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def security_report(m: int, n: int,
                    bs: Optional[optics.BeamSplitter] = None) -> SecurityReport:
    bs = bs or optics.BeamSplitter.balanced()
    probs = comparison_probs(bs)
    return SecurityReport(
        m=m,
        n=n,
        r=bs.r,
        t=bs.t,
        p=float(probs.p),
        p_prime=float(probs.p_prime),
        q=float(probs.q),
        binding=float(binding_advantage(m, probs.p, probs.q)),
        concealing=concealing_advantage(m, n, probs.p_prime),
    )
