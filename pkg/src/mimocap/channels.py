"""Reproducible random channel generation.

Channel matrices are N x M: receive antennas index the rows, transmit
antennas the columns.  Randomness comes from counter-based Philox-4x64-10
streams keyed by ``(seed, stream_id)``, so every Monte Carlo trial owns an
independent stream and any subset of trials can be regenerated in isolation,
in any order, on any worker.

Bit-level sampling contract (documented so the draws can be reproduced
outside this package): the words of stream ``(seed, stream_id)`` are the raw
Philox output for key ``[seed, stream_id]`` with the counter starting at
zero; uniforms take the top 53 bits of a word, ``u = ((w >> 11) + 0.5) *
2**-53``, open at both ends; complex Gaussian entry k of a draw consumes
words 2k and 2k+1 through Box-Muller, ``h = sqrt(-ln u_{2k}) *
exp(2j*pi*u_{2k+1})``; matrices fill row-major, tap by tap.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidProfileError
from .linalg import psd_sqrt

_UINT64_SPAN = 1 << 64
PROFILE_KINDS = ("uncorrelated", "exponential")
# tolerance on sum(tap_powers) == 1
_POWER_SUM_TOL = 1e-9


@dataclass(frozen=True)
class RngStream:
    """One independent random stream, identified by (seed, stream_id)."""

    seed: int
    stream_id: int

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= value < _UINT64_SPAN:
                raise ValueError("%s must be a 64-bit unsigned integer, got %r" % (name, value))

    def raw(self, nwords):
        """Raw 64-bit words of this stream (mostly for tests)."""
        return _kernels.philox_raw(self.seed, self.stream_id, nwords)


@dataclass(frozen=True)
class AntennaConfig:
    """Array sizes: tx transmit antennas (M), rx receive antennas (N)."""

    tx: int
    rx: int

    def __post_init__(self):
        if self.tx < 1 or self.rx < 1:
            raise ValueError("antenna counts must be >= 1, got tx=%d rx=%d" % (self.tx, self.rx))


@dataclass(frozen=True)
class CorrelationProfile:
    """L-tap power profile with a per-tap receive-side correlation shape.

    kind "uncorrelated" gives R_l = p_l * I_N; kind "exponential" gives
    R_l = p_l * E with E[i, j] = coefficient**|i - j|.  Tap powers p_l are
    normalized to sum to 1, so trace(sum_l R_l) = N up to round-off for
    every profile; that pins the total received power and makes profiles
    with different tap counts directly comparable.
    """

    kind: str = "uncorrelated"
    coefficient: float = 0.0
    tap_powers: tuple = (1.0,)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidProfileError("unknown profile kind %r" % (self.kind,))
        if not 0.0 <= self.coefficient < 1.0:
            raise InvalidProfileError(
                "correlation coefficient must lie in [0, 1), got %r" % (self.coefficient,)
            )
        powers = tuple(float(p) for p in self.tap_powers)
        if len(powers) < 1:
            raise InvalidProfileError("profile needs at least one tap")
        if any(p < 0.0 for p in powers):
            raise InvalidProfileError("tap powers must be >= 0, got %r" % (powers,))
        if abs(math.fsum(powers) - 1.0) > _POWER_SUM_TOL:
            raise InvalidProfileError(
                "tap powers must sum to 1 (got %.12g)" % math.fsum(powers)
            )
        object.__setattr__(self, "tap_powers", powers)

    @property
    def n_taps(self):
        return len(self.tap_powers)


def uniform_tap_powers(n_taps):
    """Equal tap powers 1/L."""
    if n_taps < 1:
        raise InvalidProfileError("need at least one tap")
    return tuple(1.0 / n_taps for _ in range(n_taps))


def expdecay_tap_powers(n_taps, rate):
    """Exponentially decaying tap powers p_l proportional to exp(-rate*l)."""
    if n_taps < 1:
        raise InvalidProfileError("need at least one tap")
    if rate < 0.0:
        raise InvalidProfileError("decay rate must be >= 0, got %r" % (rate,))
    raw = [math.exp(-rate * l) for l in range(n_taps)]
    total = math.fsum(raw)
    return tuple(p / total for p in raw)


@dataclass(frozen=True, eq=False)
class TapSet:
    """L correlated channel taps H_l stacked as a (L, N, M) array."""

    taps: np.ndarray
    profile: CorrelationProfile

    @property
    def n_taps(self):
        return self.taps.shape[0]

    @property
    def n_rx(self):
        return self.taps.shape[1]

    @property
    def n_tx(self):
        return self.taps.shape[2]


@dataclass(frozen=True)
class ToneGrid:
    """OFDM tone layout: n_tones subcarriers, with one selected tone index."""

    n_tones: int
    tone: int = 0

    def __post_init__(self):
        if self.n_tones < 1:
            raise ValueError("n_tones must be >= 1, got %d" % self.n_tones)
        if not 0 <= self.tone < self.n_tones:
            raise ValueError(
                "tone index must lie in [0, %d), got %d" % (self.n_tones, self.tone)
            )


def sample_iid_cgaussian(cfg, stream):
    """N x M i.i.d. CN(0, 1) channel matrix drawn from the given stream."""
    flat = _kernels.sample_cgauss(stream.seed, stream.stream_id, cfg.rx * cfg.tx)
    return flat.reshape(cfg.rx, cfg.tx)


def _correlation_base(profile, n_rx):
    if profile.kind == "uncorrelated":
        return np.eye(n_rx, dtype=np.complex128)
    idx = np.arange(n_rx)
    return (profile.coefficient ** np.abs(idx[:, None] - idx[None, :])).astype(np.complex128)


def build_correlation(profile, cfg):
    """Per-tap receive correlation matrices R_l, stacked (L, N, N).

    The shared shape matrix has unit diagonal, so trace(R_l) = p_l * N and
    trace(sum_l R_l) = N.
    """
    base = _correlation_base(profile, cfg.rx)
    powers = np.asarray(profile.tap_powers, dtype=np.float64)
    return powers[:, None, None] * base


def correlation_roots(profile, cfg):
    """Coloring matrices B_l with B_l B_l^H = R_l, stacked (L, N, N).

    The uncorrelated kind short-circuits to sqrt(p_l) * I so the L=1 path
    reproduces the i.i.d. sampler bit for bit.
    """
    powers = np.asarray(profile.tap_powers, dtype=np.float64)
    if profile.kind == "uncorrelated":
        base_root = np.eye(cfg.rx, dtype=np.complex128)
    else:
        base_root = psd_sqrt(_correlation_base(profile, cfg.rx))
    return np.sqrt(powers)[:, None, None] * base_root


def sample_tap_channel(profile, cfg, stream):
    """TapSet draw: H_l = B_l W_l with independent i.i.d. W_l per tap.

    Tap l of the draw consumes entries [l*N*M, (l+1)*N*M) of the stream, so
    the taps are mutually independent and E ||H_l||_F^2 = trace(R_l) * M.
    """
    count = profile.n_taps * cfg.rx * cfg.tx
    white = _kernels.sample_cgauss(stream.seed, stream.stream_id, count)
    white = white.reshape(profile.n_taps, cfg.rx, cfg.tx)
    taps = correlation_roots(profile, cfg) @ white
    return TapSet(taps=taps, profile=profile)


def freq_response(taps, grid):
    """Per-tone channel H_D = sum_l H_l exp(-2j*pi*l*D/n) at the grid's tone."""
    l_idx = np.arange(taps.n_taps)
    phase = np.exp((-2j * np.pi * grid.tone / grid.n_tones) * l_idx)
    return np.einsum("l,lnm->nm", phase, taps.taps)


def freq_response_all(taps, n_tones):
    """All tone responses stacked (n_tones, N, M)."""
    tone_idx = np.arange(n_tones)
    l_idx = np.arange(taps.n_taps)
    phase = np.exp((-2j * np.pi / n_tones) * np.outer(tone_idx, l_idx))
    return np.einsum("dl,lnm->dnm", phase, taps.taps)
