"""Amplitude-level model of the single-photon comparison interferometer.

One photon per slot enters a beam splitter; the transmitted component is
routed by a polarizing beam splitter into one of two time bins (direct path
or optical loop) toward an optical switch on the receiver's side, while the
reflected component stays in the sender-side arm. The switch, when open at
a time bin, performs a projective "photon here?" measurement feeding
detector D2. Whatever survives returns to the beam splitter and recombines
into detectors D0/D1.

Conventions (pinned, see module tests):
  * beam splitter: transmit sqrt(t), reflect i*sqrt(r);
  * the round trip adds a pi phase to the sender-side arm, so an
    uninterrupted interferometer sends the photon to D0 with certainty;
  * H-polarized light takes the direct path (bin 0), V takes the loop
    (bin 1);
  * time is discrete: bins 0 and 1 at the switch, bin 2 for the return
    deadline.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ContractViolationError, ParameterError

NORM_TOL = 1e-12

# Logical time bins.
TIME_BIN_DIRECT = 0   # direct path through the PBS to the switch
TIME_BIN_LOOP = 1     # through the optical loop to the switch
TIME_BIN_RETURN = 2   # round trip back to the sender's detectors
TIME_BIN_NONE = -1


class Detector(Enum):
    D0 = "D0"
    D1 = "D1"
    D2 = "D2"
    NONE = "NONE"


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter with reflectivity r and transmissivity t."""

    r: float
    t: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.r <= 1.0 and 0.0 <= self.t <= 1.0):
            raise ParameterError(f"r={self.r}, t={self.t} must lie in [0, 1]")
        if abs(self.r + self.t - 1.0) > NORM_TOL:
            raise ParameterError(f"r + t = {self.r + self.t} != 1")

    @classmethod
    def balanced(cls) -> "BeamSplitter":
        """The honest half-transparent, half-reflecting mirror."""
        return cls(0.5, 0.5)

    @classmethod
    def from_transmissivity(cls, t: float) -> "BeamSplitter":
        return cls(1.0 - t, t)


@dataclass(frozen=True)
class Polarization:
    """Single-photon polarization as complex amplitudes over the H/V basis."""

    c_h: complex
    c_v: complex

    def __post_init__(self) -> None:
        norm = abs(self.c_h) ** 2 + abs(self.c_v) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractViolationError(f"polarization norm {norm} != 1")

    @property
    def prob_v(self) -> float:
        return abs(self.c_v) ** 2

    @classmethod
    def from_bit(cls, bit: int) -> "Polarization":
        """Honest encoding: bit 0 -> H, bit 1 -> V."""
        return V if bit else H


H = Polarization(1.0, 0.0)
V = Polarization(0.0, 1.0)
PLUS = Polarization(1 / math.sqrt(2), 1 / math.sqrt(2))
MINUS = Polarization(1 / math.sqrt(2), -1 / math.sqrt(2))


@dataclass(frozen=True)
class PhotonState:
    """Photon amplitudes over the interferometer modes.

    amp_a        -- sender-side arm (toward the sender's Faraday mirror)
    amp_b_direct -- receiver-side arm, direct time bin (bin 0)
    amp_b_loop   -- receiver-side arm, optical-loop time bin (bin 1)

    All three zero means the photon has been absorbed (vacuum).
    """

    amp_a: complex
    amp_b_direct: complex
    amp_b_loop: complex

    @property
    def norm_sq(self) -> float:
        return (abs(self.amp_a) ** 2 + abs(self.amp_b_direct) ** 2
                + abs(self.amp_b_loop) ** 2)

    @property
    def is_vacuum(self) -> bool:
        return self.norm_sq < NORM_TOL

    def check_normalized(self) -> None:
        norm = self.norm_sq
        if abs(norm - 1.0) > NORM_TOL and norm > NORM_TOL:
            raise ContractViolationError(f"photon state norm {norm} != 1")


VACUUM = PhotonState(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SwitchSchedule:
    """Set of time bins at which the optical switch is open."""

    open_bins: frozenset

    @classmethod
    def honest(cls, a_bit: int) -> "SwitchSchedule":
        """Open the single bin matching the controller's bit (0 -> direct)."""
        return cls(frozenset({TIME_BIN_LOOP if a_bit else TIME_BIN_DIRECT}))

    @classmethod
    def both(cls) -> "SwitchSchedule":
        return cls(frozenset({TIME_BIN_DIRECT, TIME_BIN_LOOP}))

    @classmethod
    def closed(cls) -> "SwitchSchedule":
        return cls(frozenset())


@dataclass(frozen=True)
class DetectionOutcome:
    detector: Detector
    time_bin: int


def bs_forward(pol: Polarization, bs: BeamSplitter) -> PhotonState:
    """First beam-splitter pass plus PBS routing into time bins.

    Reflection (amplitude i*sqrt(r)) keeps the photon in the sender-side
    arm; transmission (sqrt(t)) sends it to the receiver, where the PBS
    routes the H component into the direct bin and the V component into
    the loop bin.
    """
    st = math.sqrt(bs.t)
    sr = math.sqrt(bs.r)
    return PhotonState(
        amp_a=1j * sr,
        amp_b_direct=st * pol.c_h,
        amp_b_loop=st * pol.c_v,
    )


def apply_switch(
    state: PhotonState,
    schedule: SwitchSchedule,
    rng: np.random.Generator,
) -> tuple[PhotonState, Optional[DetectionOutcome]]:
    """Gate the receiver-side bins through the switch.

    Each open bin performs a projective measurement: with probability equal
    to the squared amplitude in that bin the photon is absorbed at D2;
    otherwise the bin's amplitude is zeroed and the remainder renormalized.
    Closed bins pass untouched (mirror reflection, phase preserved).
    """
    state.check_normalized()
    amps = [state.amp_b_direct, state.amp_b_loop]
    norm = 1.0
    for time_bin in (TIME_BIN_DIRECT, TIME_BIN_LOOP):
        if time_bin not in schedule.open_bins:
            continue
        p_here = abs(amps[time_bin]) ** 2 / norm
        if p_here <= 0.0:
            continue
        if rng.random() < p_here:
            return VACUUM, DetectionOutcome(Detector.D2, time_bin)
        amps[time_bin] = 0.0
        norm *= 1.0 - p_here
    if norm <= NORM_TOL:
        # Measurement covered (numerically) all remaining amplitude.
        return VACUUM, None
    scale = 1.0 / math.sqrt(norm)
    return (
        PhotonState(state.amp_a * scale, amps[0] * scale, amps[1] * scale),
        None,
    )


def bs_return(state: PhotonState, bs: BeamSplitter) -> tuple[float, float]:
    """Second beam-splitter pass; returns (P_D0, P_D1).

    The sender-side arm picks up the round-trip pi phase before
    recombining, which makes the uninterrupted interferometer output
    deterministic at D0. Surviving receiver-side amplitudes are summed;
    in every supported scenario at most one time bin is occupied here.
    """
    if state.is_vacuum:
        return 0.0, 0.0
    st = math.sqrt(bs.t)
    sr = math.sqrt(bs.r)
    amp_a = -state.amp_a
    amp_b = state.amp_b_direct + state.amp_b_loop
    amp_d0 = 1j * sr * amp_a + st * amp_b
    amp_d1 = st * amp_a + 1j * sr * amp_b
    return abs(amp_d0) ** 2, abs(amp_d1) ** 2


def collapse_at_pbs(pol: Polarization, rng: np.random.Generator) -> int:
    """Collapse an arbitrary polarization into the H/V routing basis.

    Returns the effective routing bit (0 for H, 1 for V). Superpositions
    are adversarial inputs; the PBS turns them into probabilistic routing.
    """
    return int(rng.random() < pol.prob_v)


def run_slot(
    a_bit: int,
    b_bit: int,
    bs: BeamSplitter,
    rng: np.random.Generator,
) -> DetectionOutcome:
    """One honest slot: forward pass, switch gating, return pass, sampling."""
    state = bs_forward(Polarization.from_bit(b_bit), bs)
    state, click = apply_switch(state, SwitchSchedule.honest(a_bit), rng)
    if click is not None:
        return click
    p0, p1 = bs_return(state, bs)
    total = p0 + p1
    if total <= 0.0:
        return DetectionOutcome(Detector.NONE, TIME_BIN_NONE)
    if rng.random() * total < p0:
        return DetectionOutcome(Detector.D0, TIME_BIN_RETURN)
    return DetectionOutcome(Detector.D1, TIME_BIN_RETURN)


def run_slot_multiphoton(
    k: int,
    a_bit: int,
    b_bit: int,
    bs: BeamSplitter,
    rng: np.random.Generator,
) -> Counter:
    """k independent, distinguishable photons through one slot.

    No photon-photon interference is modeled; click counting is all the
    detection argument needs. Returns a Counter over Detector.
    """
    if k < 1:
        raise ParameterError("photon count k must be >= 1")
    counts: Counter = Counter()
    for _ in range(k):
        counts[run_slot(a_bit, b_bit, bs, rng).detector] += 1
    return counts


def outcome_distribution(
    a_bit: int,
    b_bit: int,
    bs: BeamSplitter,
) -> dict[Detector, float]:
    """Closed-form per-slot detector probabilities.

    Mismatched bits leave the interferometer uninterrupted (D0 certain);
    matched bits give (r^2, r*t, t) over (D0, D1, D2).
    """
    if a_bit != b_bit:
        return {Detector.D0: 1.0, Detector.D1: 0.0, Detector.D2: 0.0}
    return {
        Detector.D0: bs.r * bs.r,
        Detector.D1: bs.r * bs.t,
        Detector.D2: bs.t,
    }


def sample_detectors(
    eq: np.ndarray,
    bs: BeamSplitter,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized honest-slot sampler.

    eq is a boolean array marking slots where the two parties' bits match.
    Returns int8 detector codes (0 -> D0, 1 -> D1, 2 -> D2) with the same
    shape, distributed per outcome_distribution. Equivalence with the
    amplitude-level run_slot is enforced by the Monte Carlo agreement
    tests.
    """
    eq = np.asarray(eq, dtype=bool)
    u = rng.random(eq.shape)
    det = np.zeros(eq.shape, dtype=np.int8)
    r2 = bs.r * bs.r
    det[eq & (u >= r2) & (u < r2 + bs.r * bs.t)] = 1
    det[eq & (u >= r2 + bs.r * bs.t)] = 2
    return det


def phase_check(bs: BeamSplitter) -> float:
    """Residual D1 amplitude of the uninterrupted interferometer.

    The cross term i*sqrt(rt) - i*sqrt(rt) must cancel; returns its
    magnitude so tests can assert it below 1e-12.
    """
    state = bs_forward(H, bs)
    _, p1 = bs_return(state, bs)
    return math.sqrt(p1)
