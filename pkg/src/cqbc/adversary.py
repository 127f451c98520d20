"""Dishonest behaviors for both parties, paired with analytic predictions.

Each attack returns an AttackReport holding the closed-form expectation
next to the simulated totals so the two routes can be cross-checked.

The intercept and intercept/resend samplers follow the published
accounting of the attack totals: an intercepted slot whose bits mismatch
hands the photon to Alice deterministically, and a resending Alice always
re-emits one photon per attacked slot (so total clicks are exactly
n + n0_resend). See the per-slot tables in _INTERCEPT/_RESEND below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import binom

from . import optics, protocol
from .errors import AttackImpossibleError, ParameterError

DETECTORS = ("D0", "D1", "D2")


@dataclass
class AttackReport:
    """Expected vs. empirical detector totals plus attack success rates."""

    strategy: str
    params: dict
    expected: dict
    empirical: dict
    std: dict = field(default_factory=dict)
    p_alter_analytic: Optional[float] = None
    p_alter_empirical: Optional[float] = None
    detection_probability: Optional[float] = None
    detection_probability_analytic: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "params": self.params,
            "expected": self.expected,
            "empirical": self.empirical,
            "std": self.std,
            "p_alter": {
                "analytic": self.p_alter_analytic,
                "empirical": self.p_alter_empirical,
            },
            "p_detect": {
                "empirical": self.detection_probability,
                "analytic": self.detection_probability_analytic,
            },
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# Per-slot outcome tables: ((beta0, beta1, alpha), probability) entries for
# the bit-match and bit-mismatch branches; each branch has probability 1/2.
# ---------------------------------------------------------------------------

def _honest_tables(bs: optics.BeamSplitter):
    r, t = bs.r, bs.t
    eq = [((1, 0, 0), r * r), ((0, 1, 0), r * t), ((0, 0, 1), t)]
    neq = [((1, 0, 0), 1.0)]
    return eq, neq


def _intercept_tables(bs: optics.BeamSplitter):
    # Opening both bins adds nothing on matched slots (the honest bin is
    # already covered); on mismatched slots Alice captures the photon.
    eq, _ = _honest_tables(bs)
    neq = [((0, 0, 1), 1.0)]
    return eq, neq


def _resend_tables(bs: optics.BeamSplitter):
    # Resent photon re-enters the receiver arm alone: D0 with t, D1 with r.
    # Alice resends on every attacked slot, captured photon or not.
    r, t = bs.r, bs.t
    neq = [((1, 0, 1), t), ((0, 1, 1), r)]
    eq = [
        ((1, 0, 1), t * t),           # captured, resent to D0
        ((0, 1, 1), t * r),           # captured, resent to D1
        ((2, 0, 0), r * r * t),       # uncaptured: arm-a D0 + resent D0
        ((1, 1, 0), r * (r * r + t * t)),
        ((0, 2, 0), r * t * r),
    ]
    return eq, neq


def _slot_moments(tables) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of (beta0, beta1, alpha) for an equal eq/neq mix."""
    eq, neq = tables
    mean = np.zeros(3)
    second = np.zeros(3)
    for branch in (eq, neq):
        for counts, prob in branch:
            c = np.asarray(counts, dtype=float)
            mean += 0.5 * prob * c
            second += 0.5 * prob * c * c
    return mean, second - mean * mean


def _expected_totals(bs, n, n_attacked, attack_tables) -> tuple[dict, dict]:
    mean_h, var_h = _slot_moments(_honest_tables(bs))
    mean_a, var_a = _slot_moments(attack_tables)
    mean = (n - n_attacked) * mean_h + n_attacked * mean_a
    var = (n - n_attacked) * var_h + n_attacked * var_a
    expected = dict(zip(DETECTORS, mean.tolist()))
    std = dict(zip(DETECTORS, np.sqrt(var).tolist()))
    return expected, std


# ---------------------------------------------------------------------------
# Vectorized slot samplers for Alice's attacks
# ---------------------------------------------------------------------------

def _sample_intercept_sequence(n, n0, bs, rng, resend):
    """One n-slot sequence with n0 attacked slots.

    Returns (beta0, beta1, alpha, attacked) arrays; beta/alpha are click
    counts per slot.
    """
    a = protocol.alice_generate(int(rng.integers(0, 2)), 1, n, rng).bits[0]
    b = rng.integers(0, 2, size=n, dtype=np.uint8)
    eq = a == b
    attacked = np.zeros(n, dtype=bool)
    attacked[rng.permutation(n)[:n0]] = True

    beta0 = np.zeros(n, dtype=np.int16)
    beta1 = np.zeros(n, dtype=np.int16)
    alpha = np.zeros(n, dtype=np.int16)

    honest = ~attacked
    det = optics.sample_detectors(eq[honest], bs, rng)
    beta0[honest] = det == 0
    beta1[honest] = det == 1
    alpha[honest] = det == 2

    t = bs.t
    att_neq = attacked & ~eq
    att_eq = attacked & eq
    if not resend:
        alpha[att_neq] = 1
        det = optics.sample_detectors(np.ones(int(att_eq.sum()), dtype=bool), bs, rng)
        beta0[att_eq] = det == 0
        beta1[att_eq] = det == 1
        alpha[att_eq] = det == 2
    else:
        # Mismatched: deterministic capture, then resend (D0 w.p. t).
        k = int(att_neq.sum())
        alpha[att_neq] = 1
        res_d0 = rng.random(k) < t
        beta0[att_neq] += res_d0
        beta1[att_neq] += ~res_d0
        # Matched: projective capture w.p. t, else the photon collapses to
        # the sender arm and returns; a photon is resent either way.
        k = int(att_eq.sum())
        captured = rng.random(k) < t
        alpha[att_eq] = captured
        arm_d0 = (rng.random(k) < bs.r) & ~captured
        arm_d1 = ~captured & ~arm_d0
        res_d0 = rng.random(k) < t
        beta0[att_eq] += arm_d0.astype(np.int16) + res_d0.astype(np.int16)
        beta1[att_eq] += arm_d1.astype(np.int16) + (~res_d0).astype(np.int16)
    return beta0, beta1, alpha, attacked


def _alter_success_loop(n, n0, bs, rng, resend, trials):
    """Empirical one-bit alter success over fresh attacked sequences.

    Per the attack analysis, success is graded on the flipped slot alone:
    Alice flips one bit she cannot tell Bob confirmed, and succeeds iff
    Bob's record of that slot does not contradict the flip.
    """
    successes = 0
    graded = 0
    for _ in range(trials):
        beta0, beta1, alpha, attacked = _sample_intercept_sequence(
            n, n0, bs, rng, resend
        )
        candidates = alpha == 0
        if resend:
            candidates |= attacked
        idx = np.flatnonzero(candidates)
        if idx.size == 0:
            continue
        pick = idx[rng.integers(0, idx.size)]
        graded += 1
        if beta1[pick] == 0 and (beta0[pick] + beta1[pick]) > 0:
            successes += 1
    if graded == 0:
        raise AttackImpossibleError("no flippable slot in any trial")
    return successes / graded


def intercept_alter_probability(n: int, n0: int) -> float:
    """Closed-form one-bit alter success under pure interception."""
    return (5 * n - 4 * n0) / (6 * n - 4 * n0)


def resend_alter_probability(n: int, n0_resend: int) -> float:
    """Closed-form one-bit alter success under intercept/resend."""
    return 5 * n / (6 * n + 4 * n0_resend)


def alice_intercept(
    n0: int,
    params: protocol.CommitmentParams,
    rng: np.random.Generator,
    alter_trials: int = 0,
) -> AttackReport:
    """Pure interception on n0 slots per sequence (absorb, never resend)."""
    n = params.n
    if not 0 <= n0 <= n:
        raise ParameterError("n0 must lie in [0, n]")
    bs = params.bs
    totals = np.zeros(3)
    for _ in range(params.m):
        beta0, beta1, alpha, _ = _sample_intercept_sequence(n, n0, bs, rng, False)
        totals += [beta0.sum(), beta1.sum(), alpha.sum()]
    expected, std = _expected_totals(bs, n, n0, _intercept_tables(bs))
    expected = {k: params.m * v for k, v in expected.items()}
    std = {k: np.sqrt(params.m) * v for k, v in std.items()}
    p_emp = None
    if alter_trials:
        p_emp = _alter_success_loop(n, n0, bs, rng, False, alter_trials)
    return AttackReport(
        strategy="alice-intercept",
        params={"n": n, "m": params.m, "n0": n0},
        expected=expected,
        std=std,
        empirical=dict(zip(DETECTORS, [int(v) for v in totals])),
        p_alter_analytic=intercept_alter_probability(n, n0),
        p_alter_empirical=p_emp,
        extras={"total_clicks": int(totals.sum())},
    )


def alice_intercept_resend(
    n0_resend: int,
    params: protocol.CommitmentParams,
    rng: np.random.Generator,
    alter_trials: int = 0,
) -> AttackReport:
    """Intercept on n0_resend slots, immediately re-emitting a photon."""
    n = params.n
    if not 0 <= n0_resend <= n:
        raise ParameterError("n0_resend must lie in [0, n]")
    bs = params.bs
    totals = np.zeros(3)
    for _ in range(params.m):
        beta0, beta1, alpha, _ = _sample_intercept_sequence(
            n, n0_resend, bs, rng, True
        )
        totals += [beta0.sum(), beta1.sum(), alpha.sum()]
    expected, std = _expected_totals(bs, n, n0_resend, _resend_tables(bs))
    expected = {k: params.m * v for k, v in expected.items()}
    std = {k: np.sqrt(params.m) * v for k, v in std.items()}
    p_emp = None
    if alter_trials:
        p_emp = _alter_success_loop(n, n0_resend, bs, rng, True, alter_trials)
    return AttackReport(
        strategy="alice-intercept-resend",
        params={"n": n, "m": params.m, "n0_resend": n0_resend},
        expected=expected,
        std=std,
        empirical=dict(zip(DETECTORS, [int(v) for v in totals])),
        p_alter_analytic=resend_alter_probability(n, n0_resend),
        p_alter_empirical=p_emp,
        extras={"total_clicks": int(totals.sum()),
                "expected_total_clicks": params.m * (n + n0_resend)},
    )


def alice_optimal_alter(
    transcript: protocol.CommitmentTranscript,
    target_bit: int,
    rng: np.random.Generator,
) -> protocol.OpeningMessage:
    """Forge an opening for the opposite bit.

    Per sequence, flips exactly one claimed bit chosen uniformly among the
    slots where Alice's D2 stayed silent (the slots she cannot tell Bob
    confirmed). The claimed D2 record is reported truthfully.
    """
    if transcript.alice.committed_bit is None:
        raise ParameterError("transcript has no committed bit")
    if target_bit == transcript.alice.committed_bit:
        raise ParameterError("target bit equals the committed bit")
    claimed = transcript.alice.bits.copy()
    for i in range(transcript.params.m):
        unknown = np.flatnonzero(transcript.alpha[i] == 0)
        if unknown.size == 0:
            raise AttackImpossibleError(f"sequence {i} has no unknown slot")
        j = unknown[rng.integers(0, unknown.size)]
        claimed[i, j] ^= 1
    return protocol.OpeningMessage(
        claimed_bit=target_bit,
        claimed_bits=claimed,
        claimed_d2=transcript.alpha > 0,
    )


# ---------------------------------------------------------------------------
# Bob's attacks, each graded against Alice's D2-rate check
# ---------------------------------------------------------------------------

def d2_detection_probability(
    p_slot: float,
    params: protocol.CommitmentParams,
) -> float:
    """Probability that the D2-rate check trips when each slot clicks D2
    with probability p_slot (exact binomial, across all m sequences)."""
    lo, hi = protocol.d2_window(params)
    n = params.n
    pass_seq = binom.cdf(np.floor(hi), n, p_slot) - binom.cdf(
        np.ceil(lo) - 1, n, p_slot
    )
    return float(1.0 - pass_seq ** params.m)


def _detection_runs(sample_d2_flags, params, rng, runs):
    """Empirical trip rate of the D2 check over independent commit runs.

    sample_d2_flags(rng) must return an (m, n) boolean array of per-slot
    D2 clicks. Returns (detection frequency, mean per-slot D2 rate,
    per-sequence failure frequency).
    """
    lo, hi = protocol.d2_window(params)
    detected = 0
    seq_failures = 0
    rate_sum = 0.0
    for _ in range(runs):
        flags = sample_d2_flags(rng)
        counts = flags.sum(axis=1)
        bad = (counts < lo) | (counts > hi)
        seq_failures += int(bad.sum())
        detected += bool(bad.any())
        rate_sum += float(flags.mean())
    return detected / runs, rate_sum / runs, seq_failures / (runs * params.m)


def bob_illegal_bs(
    t_prime: float,
    params: protocol.CommitmentParams,
    rng: np.random.Generator,
    runs: int = 1000,
) -> AttackReport:
    """Bob swaps the mirror for one with transmissivity t_prime."""
    if not 0.0 < t_prime < 1.0:
        raise ParameterError("t_prime must lie in (0, 1)")
    bs = optics.BeamSplitter.from_transmissivity(t_prime)
    shape = (params.m, params.n)

    def sample(rng):
        eq = rng.integers(0, 2, size=shape) == rng.integers(0, 2, size=shape)
        return optics.sample_detectors(eq, bs, rng) == 2

    detect, rate, seq_fail = _detection_runs(sample, params, rng, runs)
    return AttackReport(
        strategy="bob-illegal-bs",
        params={"n": params.n, "m": params.m, "t_prime": t_prime, "runs": runs},
        expected={"d2_slot_rate": t_prime / 2.0},
        empirical={"d2_slot_rate": rate},
        detection_probability=detect,
        detection_probability_analytic=d2_detection_probability(
            t_prime / 2.0, params
        ),
        extras={"per_sequence_failure_rate": seq_fail},
    )


def bob_multiphoton(
    k: int,
    params: protocol.CommitmentParams,
    rng: np.random.Generator,
    runs: int = 1000,
) -> AttackReport:
    """Bob loads every slot with k independent photons."""
    if k < 2:
        raise ParameterError("multi-photon attack needs k >= 2")
    t = params.bs.t
    shape = (params.m, params.n)
    p_any_capture = 1.0 - (1.0 - t) ** k

    def sample(rng):
        eq = rng.integers(0, 2, size=shape) == rng.integers(0, 2, size=shape)
        return eq & (rng.random(shape) < p_any_capture)

    detect, rate, seq_fail = _detection_runs(sample, params, rng, runs)
    return AttackReport(
        strategy="bob-multiphoton",
        params={"n": params.n, "m": params.m, "k": k, "runs": runs},
        expected={"d2_slot_rate": 0.5 * p_any_capture},
        empirical={"d2_slot_rate": rate},
        detection_probability=detect,
        detection_probability_analytic=d2_detection_probability(
            0.5 * p_any_capture, params
        ),
        extras={"per_sequence_failure_rate": seq_fail},
    )


def bob_illegal_polarization(
    pol: optics.Polarization,
    params: protocol.CommitmentParams,
    rng: np.random.Generator,
    runs: int = 100,
) -> AttackReport:
    """Bob sends an arbitrary polarization every slot.

    The PBS collapses it into probabilistic H/V routing, so the slot
    statistics reduce to honest ones with a re-randomized comparison bit;
    Bob gains no confirmation advantage.
    """
    shape = (params.m, params.n)
    confirm_sum = 0.0
    d2_sum = 0.0
    for _ in range(runs):
        a = rng.integers(0, 2, size=shape, dtype=np.uint8)
        b_eff = (rng.random(shape) < pol.prob_v).astype(np.uint8)
        det = optics.sample_detectors(a == b_eff, params.bs, rng)
        confirm_sum += float((det != 0).mean())   # D1 click or D2-inferred
        d2_sum += float((det == 2).mean())
    p = (params.bs.r * params.bs.t + params.bs.t) / 2.0
    return AttackReport(
        strategy="bob-illegal-polarization",
        params={"n": params.n, "m": params.m, "prob_v": pol.prob_v,
                "runs": runs},
        expected={"confirmation_rate": p, "d2_slot_rate": params.bs.t / 2.0},
        empirical={"confirmation_rate": confirm_sum / runs,
                   "d2_slot_rate": d2_sum / runs},
    )
