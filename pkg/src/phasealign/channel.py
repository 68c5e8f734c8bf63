"""Phase-fading interference channel model and per-link rate functions.

Receiver k observes sum_j e^{i theta_kj} x_j[t] + z_k[t] with unit-variance
circularly symmetric complex noise and a peak power constraint |x_j[t]| <= 1.
The phase matrix theta is drawn once, i.i.d. uniform on [-pi, pi), and never
changes. Transmitter j pre-rotates its (real) symbol by e^{-i theta_jj} so the
direct link arrives on the real axis; receiver k keeps only the real part of
its observation. The surviving real channel has unit direct gains, cross
gains cos(theta_kj - theta_jj), and noise variance 1/2.

Rates are in nats throughout. Conversion to bits is an output-formatting
concern handled by the CLI.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .seeding import make_generator

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)

# Noise variance of the real projected channel (half the complex unit noise).
REAL_NOISE_VAR = 0.5


def wrap_angle(x):
    """Wrap angles into the half-open interval [-pi, pi).

    wrap_angle(pi) == -pi by the half-open convention. Accepts scalars or
    arrays; returns a float for scalar input.
    """
    arr = np.asarray(x, dtype=float)
    wrapped = np.mod(arr + math.pi, TWO_PI) - math.pi
    # float rounding at the seam can land exactly on +pi; fold it back
    wrapped = np.where(wrapped >= math.pi, -math.pi, wrapped)
    if arr.ndim == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the static phase matrix; entry [k, j] rotates link j -> k."""

    k: int
    theta: np.ndarray
    seed: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.theta.shape != (self.k, self.k):
            raise ValueError("theta must be k x k")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta has non-finite entries")
        if np.any(self.theta < -math.pi) or np.any(self.theta >= math.pi):
            raise ValueError("theta entries must lie in [-pi, pi)")
        self.theta.setflags(write=False)


@dataclass(frozen=True)
class EffectiveGains:
    """Real cross gains of the projected channel; unit diagonal.

    values[k, j] = cos(theta_kj - theta_jj). The `normalized` flag records
    that the direct-link rotation was removed before taking cosines.
    """

    k: int
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        if self.values.shape != (self.k, self.k):
            raise ValueError("gain matrix must be k x k")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class RateReport:
    """Per-user rates (nats per channel use) for one scheme on one channel."""

    scheme: str
    per_user: np.ndarray
    sum_rate: float

    def __post_init__(self):
        per_user = np.asarray(self.per_user, dtype=float)
        if per_user.ndim != 1 or per_user.size < 1:
            raise ValueError("per_user must be a non-empty vector")
        if not np.all(np.isfinite(per_user)) or np.any(per_user < 0):
            raise ValueError("per-user rates must be finite and >= 0")
        if abs(self.sum_rate - float(per_user.sum())) > 1e-9:
            raise ValueError("sum_rate inconsistent with per_user (tol 1e-9)")
        per_user.setflags(write=False)

    @classmethod
    def from_per_user(cls, scheme: str, per_user) -> "RateReport":
        per_user = np.asarray(per_user, dtype=float)
        return cls(scheme, per_user, float(per_user.sum()))


def sample_channel(k: int, seed: int = 0) -> ChannelRealization:
    """Draw a k x k phase matrix, i.i.d. uniform on [-pi, pi).

    Identical (k, seed) pairs reproduce the matrix bit for bit. The fill is
    row-major from a single Philox stream, so row blocks can be regenerated
    incrementally (see alignment.build_graph_streamed).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    gen = make_generator(seed)
    theta = gen.uniform(-math.pi, math.pi, size=(k, k))
    return ChannelRealization(k=k, theta=theta, seed=seed)


def is_normalized(ch: ChannelRealization) -> bool:
    """True when every direct-link phase is exactly zero."""
    return bool(np.all(ch.theta.diagonal() == 0.0))


def normalize(ch: ChannelRealization) -> ChannelRealization:
    """Remove direct-link rotations: theta'_kj = wrap(theta_kj - theta_jj).

    Column j is shifted by the direct phase of transmitter j, which models the
    e^{-i theta_jj} pre-rotation. The diagonal becomes exactly zero. Because
    the entries are i.i.d. circular-uniform, the off-diagonal entries of the
    result are again i.i.d. uniform on [-pi, pi).
    """
    if is_normalized(ch):
        return ch
    shifted = ch.theta - ch.theta.diagonal()[None, :]
    return ChannelRealization(k=ch.k, theta=wrap_angle(shifted), seed=ch.seed)


def effective_gains(ch: ChannelRealization) -> EffectiveGains:
    """Real gains cos(theta_kj - theta_jj) of the projected channel.

    Normalization is applied internally when absent. The diagonal is exactly
    one (cos of an exact zero).
    """
    chn = normalize(ch)
    return EffectiveGains(k=ch.k, values=np.cos(chn.theta), normalized=True)


def sinr_rate(signal_power: float, interference_power: float) -> float:
    """Gaussian-codebook rate ln(1 + S / (I + 1/2)) on the projected channel.

    The 1/2 is the projected noise variance; interference_power is the sum of
    squared cross gains times transmit powers treated as extra noise.
    """
    if not (math.isfinite(signal_power) and math.isfinite(interference_power)):
        raise ValueError("powers must be finite")
    if signal_power < 0 or interference_power < 0:
        raise ValueError("powers must be >= 0")
    return math.log1p(signal_power / (interference_power + REAL_NOISE_VAR))


def bpsk_rate(signal_power: float, noise_variance: float) -> float:
    """Mutual information of +-sqrt(signal_power) inputs through real
    Gaussian noise of the given variance, in nats.

    Uses the identity I = ln 2 - E_z[softplus(-2*snr - 2*sqrt(snr)*z)] with
    z standard normal, evaluated by adaptive quadrature (absolute error well
    under 1e-6). Value lies in [0, ln 2] and depends only on snr = S/v.
    """
    if not (math.isfinite(signal_power) and math.isfinite(noise_variance)):
        raise ValueError("arguments must be finite")
    if signal_power < 0:
        raise ValueError("signal_power must be >= 0")
    if noise_variance <= 0:
        raise ValueError("noise_variance must be > 0")
    if signal_power == 0.0:
        return 0.0
    snr = signal_power / noise_variance
    root = math.sqrt(snr)
    norm_const = 1.0 / math.sqrt(TWO_PI)

    def integrand(z):
        return np.logaddexp(0.0, -2.0 * snr - 2.0 * root * z) * (
            norm_const * math.exp(-0.5 * z * z)
        )

    # Split at the softplus knee (z = -root) so the adaptive rule sees the
    # transition; each piece is smooth and rapidly decaying.
    left, _ = integrate.quad(integrand, -np.inf, -root, epsabs=5e-11, limit=300)
    right, _ = integrate.quad(integrand, -root, np.inf, epsabs=5e-11, limit=300)
    rate = LN2 - (left + right)
    return min(LN2, max(0.0, rate))
