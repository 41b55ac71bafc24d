"""Sound direction-of-arrival from a horizontal two-microphone pair.

The time difference of arrival comes from an instantaneous GCC-PHAT: the
cross spectrum of one frame pair, magnitude-normalised so only phase carries
information, searched over the physically possible lag window with parabolic
sub-sample refinement. A far-field model turns the delay into a bearing:
theta = arcsin(c * tau / d), broadside = 0, positive toward the left channel.

Positive tau means the right channel lags the left one (source on the left).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_FRAME = 1024
DEFAULT_HOP = 512
ENERGY_FLOOR_RMS = 1e-6
RELIABILITY_RATIO = 0.7
DOA_MARGIN = 0.02


class DegenerateSignal(ValueError):
    """A frame with too little energy to produce a meaningful delay."""


class OutOfRange(ValueError):
    """A delay implying |sin(theta)| beyond 1 + margin: not a physical source."""


@dataclass(frozen=True)
class MicPairGeometry:
    spacing: float  # metres between the two capsules
    sample_rate: float  # Hz
    speed_of_sound: float = 343.0

    def __post_init__(self):
        if self.spacing <= 0 or self.sample_rate <= 0 or self.speed_of_sound <= 0:
            raise ValueError("geometry values must be positive")

    @property
    def max_tau(self) -> float:
        return self.spacing / self.speed_of_sound


@dataclass(frozen=True)
class TdoaEstimate:
    tau: float
    peak_value: float
    frame_time: float
    reliable: bool


def gcc_phat(
    x: np.ndarray,
    y: np.ndarray,
    geom: MicPairGeometry,
    frame_time: float = 0.0,
) -> TdoaEstimate:
    """Delay of channel y relative to channel x for one frame pair."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("frames must be equal-length 1-d arrays")
    if x.size < 256:
        raise ValueError("frames shorter than 256 samples")
    if _rms(x) < ENERGY_FLOOR_RMS or _rms(y) < ENERGY_FLOOR_RMS:
        raise DegenerateSignal("frame energy below floor")

    n = x.size + y.size
    X = np.fft.rfft(x, n=n)
    Y = np.fft.rfft(y, n=n)
    # positive lag = y behind x, hence the conjugate on the first channel
    R = np.conj(X) * Y
    mag = np.abs(R)
    mag[mag < 1e-15] = 1.0
    cc = np.fft.irfft(R / mag, n=n)

    fs = geom.sample_rate
    max_shift = min(n // 2, int(math.ceil(fs * geom.max_tau)) + 1)
    cc = np.concatenate((cc[-max_shift:], cc[: max_shift + 1]))

    k = int(np.argmax(cc))
    peak = float(cc[k])

    shift = float(k - max_shift)
    if 0 < k < cc.size - 1:
        denom = cc[k - 1] - 2.0 * cc[k] + cc[k + 1]
        if abs(denom) > 1e-12:
            shift += 0.5 * float(cc[k - 1] - cc[k + 1]) / float(denom)

    tau = shift / fs
    bound = geom.max_tau + 1.0 / fs
    tau = min(max(tau, -bound), bound)

    # a close second peak means two comparable sources in the frame
    guard = 3
    lo, hi = max(0, k - guard), min(cc.size, k + guard + 1)
    rest = np.concatenate((cc[:lo], cc[hi:]))
    second = float(rest.max()) if rest.size else 0.0
    reliable = peak > 0.0 and (second / peak) <= RELIABILITY_RATIO

    return TdoaEstimate(
        tau=tau, peak_value=peak, frame_time=frame_time, reliable=reliable
    )


def tdoa_to_doa(tau: float, geom: MicPairGeometry) -> float:
    """Far-field bearing for a delay; broadside is zero."""
    s = geom.speed_of_sound * tau / geom.spacing
    if abs(s) > 1.0 + DOA_MARGIN:
        raise OutOfRange(f"c*tau/d = {s:.4f} exceeds the physical range")
    return math.asin(min(max(s, -1.0), 1.0))


def voice_active(frame: np.ndarray, threshold_db: float) -> bool:
    """Energy gate: true iff the frame RMS in dBFS reaches the threshold."""
    rms = _rms(np.asarray(frame, dtype=np.float64))
    if rms <= 0.0:
        return False
    return 20.0 * math.log10(rms) >= threshold_db


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if x.size else 0.0


def frame_pairs(
    stereo: np.ndarray,
    frame: int = DEFAULT_FRAME,
    hop: int = DEFAULT_HOP,
):
    """Yield (start_sample, left_frame, right_frame) over a (n, 2) signal."""
    stereo = np.asarray(stereo)
    if stereo.ndim != 2 or stereo.shape[1] != 2:
        raise ValueError("expected an (n, 2) stereo array")
    for start in range(0, stereo.shape[0] - frame + 1, hop):
        block = stereo[start : start + frame]
        yield start, block[:, 0], block[:, 1]
