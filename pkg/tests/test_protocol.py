"""Commit/open round-trip tests: sequence generation, transcript records,
the D2-rate check, and the verification predicate."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqbc import optics, protocol
from cqbc.errors import ParameterError
from cqbc.rng import substream


def make_params(**kw):
    kw.setdefault("m", 3)
    kw.setdefault("n", 16)
    return protocol.CommitmentParams(**kw)


# ---------------------------------------------------------------------------
# parameters and sequence generation
# ---------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ParameterError):
        protocol.CommitmentParams(m=0, n=16)
    with pytest.raises(ParameterError):
        protocol.CommitmentParams(m=3, n=1)
    with pytest.raises(ParameterError):
        protocol.CommitmentParams(m=3, n=16, d2_check_sigma=0.0)


@given(b=st.integers(0, 1), m=st.integers(1, 8), n=st.integers(2, 24),
       seed=st.integers(0, 1000))
def test_alice_parity_constraint(b, m, n, seed):
    seqs = protocol.alice_generate(b, m, n, substream(seed, 0))
    assert seqs.bits.shape == (m, n)
    assert (seqs.parities() == b).all()
    assert seqs.committed_bit == b


def test_alice_generate_uniform_over_parity_class():
    """Frequency oracle: each of the 2^(n-1) strings with the right parity
    appears with near-equal frequency, and no wrong-parity string appears."""
    n = 4
    draws = 40000
    seqs = protocol.alice_generate(1, draws, n, substream(100, 0))
    codes = seqs.bits @ (1 << np.arange(n))
    counts = np.bincount(codes, minlength=2 ** n)
    odd_parity = np.array([bin(c).count("1") % 2 for c in range(2 ** n)])
    assert (counts[odd_parity == 0] == 0).all()
    expect = draws / 2 ** (n - 1)
    tol = 4.0 * math.sqrt(expect)
    assert (np.abs(counts[odd_parity == 1] - expect) < tol).all()


def test_bob_generate_shape_and_balance():
    seqs = protocol.bob_generate(100, 50, substream(101, 0))
    assert seqs.bits.shape == (100, 50)
    assert abs(seqs.bits.mean() - 0.5) < 4.0 * math.sqrt(0.25 / 5000)
    assert seqs.committed_bit is None


# ---------------------------------------------------------------------------
# commit phase
# ---------------------------------------------------------------------------

def test_commit_phase_is_deterministic_given_seed():
    params = make_params(master_seed=7)
    t1 = protocol.run_commit_phase(params, b=1)
    t2 = protocol.run_commit_phase(params, b=1)
    assert np.array_equal(t1.alice.bits, t2.alice.bits)
    assert np.array_equal(t1.bob.bits, t2.bob.bits)
    assert np.array_equal(t1.alpha, t2.alpha)
    assert np.array_equal(t1.beta0, t2.beta0)


def test_commit_phase_detector_statistics():
    params = make_params(m=40, n=100, master_seed=8)
    t = protocol.run_commit_phase(params, b=0)
    slots = params.m * params.n
    # overall: P(D0) = (1 + r^2)/2 = 5/8, P(D1) = rt/2 = 1/8, P(D2) = t/2 = 1/4
    for arr, p in ((t.beta0, 5 / 8), (t.beta1, 1 / 8), (t.alpha, 1 / 4)):
        freq = (arr > 0).mean()
        assert abs(freq - p) < 4.0 * math.sqrt(p * (1 - p) / slots)
    # exactly one click per honest slot
    assert ((t.beta0 + t.beta1 + t.alpha) == 1).all()


def test_commit_phase_rejects_two_sided_attack():
    params = make_params()
    model = protocol.HonestSlotModel(params.bs)
    with pytest.raises(ParameterError):
        protocol.run_commit_phase(params, alice_strategy=model,
                                  bob_strategy=model)


def test_d2_check_window_and_abort():
    params = make_params(m=2, n=16, master_seed=9)
    t = protocol.run_commit_phase(params, b=0)
    lo, hi = protocol.d2_window(params)
    assert lo == pytest.approx(4 - 4 * math.sqrt(3), abs=1e-9)
    assert hi == pytest.approx(4 + 4 * math.sqrt(3), abs=1e-9)
    # force a sequence outside the window and re-run the check
    t.alpha[0, :] = 1
    assert not protocol.alice_check_d2(t, params)[0]
    assert protocol.alice_check_d2(t, params)[1]


def test_fully_transmitting_mirror_forces_abort():
    # with t = 1 every matched slot clicks D2, so ~n/2 >> n/4 clicks
    params = protocol.CommitmentParams(
        m=2, n=64, bs=optics.BeamSplitter(0.0, 1.0), master_seed=10
    )
    t = protocol.run_commit_phase(params, b=0)
    assert t.phase == protocol.PHASE_ABORTED
    assert not protocol.bob_verify_opening(t, t.honest_opening())
    assert protocol.bob_verify_opening(t, t.honest_opening()).reason == "aborted"


# ---------------------------------------------------------------------------
# verification predicate
# ---------------------------------------------------------------------------

def committed_transcript(seed=11, b=0, **kw):
    params = make_params(master_seed=seed, **kw)
    return protocol.run_commit_phase(params, b=b)


def test_honest_opening_accepts():
    t = committed_transcript()
    result = protocol.bob_verify_opening(t, t.honest_opening())
    assert result
    assert result.reason == ""


def test_parity_mismatch_rejected():
    t = committed_transcript(b=0)
    opening = t.honest_opening()
    opening.claimed_bit = 1  # bits still have parity 0
    assert protocol.bob_verify_opening(t, opening).reason == "parity-mismatch"


def test_dimension_mismatch_rejected():
    t = committed_transcript()
    opening = t.honest_opening()
    opening.claimed_bits = opening.claimed_bits[:, :-1]
    assert protocol.bob_verify_opening(t, opening).reason == "dimension-mismatch"


def test_flip_on_confirmed_slot_rejected():
    t = committed_transcript(b=0, seed=12)
    opening = t.honest_opening()
    confirmed = np.flatnonzero(t.beta1[0] > 0)
    unconfirmed = np.flatnonzero((t.beta0[0] > 0) & (t.alpha[0] == 0))
    assert confirmed.size > 0 and unconfirmed.size > 0
    # flip a confirmed slot plus an unconfirmed one to keep the parity intact
    opening.claimed_bits[0, confirmed[0]] ^= 1
    opening.claimed_bits[0, unconfirmed[0]] ^= 1
    assert (protocol.bob_verify_opening(t, opening).reason
            == "confirmed-slot-mismatch")


def test_flip_on_d0_slot_with_bit_change_accepted():
    """Flipping one bit on a D0 slot keeps every check green: this is
    exactly the residual binding gap the analytic bound quantifies."""
    t = committed_transcript(b=0, seed=13)
    opening = t.honest_opening()
    for i in range(t.params.m):
        unconfirmed = np.flatnonzero((t.beta0[i] > 0) & (t.alpha[i] == 0))
        assert unconfirmed.size > 0
        opening.claimed_bits[i, unconfirmed[0]] ^= 1
    opening.claimed_bit = 1
    assert protocol.bob_verify_opening(t, opening)


def test_wrong_d2_record_rejected():
    t = committed_transcript(seed=14)
    opening = t.honest_opening()
    opening.claimed_d2 = ~opening.claimed_d2
    assert (protocol.bob_verify_opening(t, opening).reason
            == "d2-record-mismatch")


def test_d2_inference_matches_alice_record_in_honest_run():
    t = committed_transcript(seed=15, m=10, n=64)
    assert np.array_equal(t.d2_inferred(), t.alpha > 0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), b=st.integers(0, 1))
def test_run_honest_protocol_completeness(seed, b):
    params = protocol.CommitmentParams(m=2, n=32, d2_check_sigma=6.0,
                                       master_seed=seed)
    assert protocol.run_honest_protocol(params, b=b)


# ---------------------------------------------------------------------------
# transcript serialization
# ---------------------------------------------------------------------------

def test_transcript_summary_fields():
    t = committed_transcript(seed=16)
    s = t.summary()
    assert s["m"] == t.params.m and s["n"] == t.params.n
    assert s["phase"] == protocol.PHASE_COMMITTED
    total = s["clicks"]["D0"] + s["clicks"]["D1"] + s["clicks"]["D2"]
    assert total == s["total_slots"]
    assert s["d2_check"]["all_passed"]
    # JSON round trip
    import json
    assert json.loads(t.summary_json()) == s


def test_transcript_csv(tmp_path):
    t = committed_transcript(seed=17, m=2, n=8)
    path = tmp_path / "transcript.csv"
    t.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,j,a,b,detector,time_bin"
    assert len(lines) == 1 + 2 * 8
    for line in lines[1:]:
        i, j, a, b, det, tb = line.split(",")
        assert det in ("D0", "D1", "D2")
        if det == "D0":
            assert int(tb) == optics.TIME_BIN_RETURN
        if det == "D2":
            assert int(tb) in (optics.TIME_BIN_DIRECT, optics.TIME_BIN_LOOP)
