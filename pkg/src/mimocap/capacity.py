"""Closed-form capacity and mutual-information evaluations.

Every function here is deterministic: randomness lives in
:mod:`mimocap.channels` and averaging in :mod:`mimocap.estimators`.

SNR convention.  ``SnrSpec.rho`` is the linear SNR per receive antenna.
Operations on a random channel matrix split it across the M transmit
antennas, i.e. they evaluate log2 det(I + (rho/M) H H^H).  For the
multitone model the same per-antenna scale arises from a total transmit
power ``n_tones`` times larger spread over the tones, so a single
``snr_db`` drives flat and multitone runs on an equal per-tone footing
and the single-tap multitone value collapses onto the flat one exactly.
``SnrSpec.total_power`` is the flat-model budget P = rho * sigma_n2 used
by the water-filling comparison.  The asymptotic formulas take the
per-receive-antenna SNR directly (their ``rho_bar`` equals ``rho``).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channels import AntennaConfig, build_correlation
from .errors import (
    DimensionMismatchError,
    NoPositiveModesError,
    PowerBudgetExceededError,
)
from .linalg import as_complex_matrix, gram, herm_eigvals

_LN2 = math.log(2.0)
# absolute slack on sum(mode_powers) <= total_power
_BUDGET_TOL = 1e-9


@dataclass(frozen=True)
class SnrSpec:
    """Signal-to-noise operating point.

    ``snr_db`` is the user-facing value; ``rho`` is its linear form
    10**(snr_db/10) and is always derived, never stored, so the pair can
    not drift apart.  ``sigma_n2`` is the per-antenna noise variance.
    """

    snr_db: float
    sigma_n2: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite, got %r" % (self.snr_db,))
        if not (math.isfinite(self.sigma_n2) and self.sigma_n2 > 0.0):
            raise ValueError("sigma_n2 must be positive, got %r" % (self.sigma_n2,))
        if not math.isfinite(self.rho):
            raise ValueError("snr_db=%r overflows the linear scale" % (self.snr_db,))

    @classmethod
    def from_rho(cls, rho, sigma_n2=1.0):
        if not (math.isfinite(rho) and rho > 0.0):
            raise ValueError("rho must be positive, got %r" % (rho,))
        return cls(snr_db=10.0 * math.log10(rho), sigma_n2=sigma_n2)

    @property
    def rho(self):
        """Linear SNR per receive antenna."""
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def total_power(self):
        """Total transmit power of the flat narrowband model, P = rho * sigma_n2."""
        return self.rho * self.sigma_n2


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power split across channel eigenmodes.

    ``mode_powers[i]`` pairs with the i-th descending eigenvalue of the
    channel gram matrix.  ``water_level`` is the level mu the active
    powers were cut from; ``total_power`` is the budget P the allocation
    was drawn against.  Construction rejects allocations that overspend
    the budget, so a PowerAllocation is safe to evaluate as-is.
    """

    mode_powers: tuple
    water_level: float
    total_power: float

    def __post_init__(self):
        powers = tuple(float(p) for p in self.mode_powers)
        if any(not math.isfinite(p) or p < 0.0 for p in powers):
            raise ValueError("mode powers must be finite and >= 0, got %r" % (powers,))
        budget = float(self.total_power)
        if budget < 0.0:
            raise ValueError("total_power must be >= 0, got %r" % (budget,))
        spent = math.fsum(powers)
        if spent > budget + _BUDGET_TOL * max(1.0, budget):
            raise PowerBudgetExceededError(
                "allocation spends %.12g but the budget is %.12g" % (spent, budget)
            )
        object.__setattr__(self, "mode_powers", powers)
        object.__setattr__(self, "total_power", budget)

    @property
    def n_modes(self):
        return len(self.mode_powers)

    @property
    def n_active(self):
        return sum(1 for p in self.mode_powers if p > 0.0)


def instant_capacity_flat(h, snr, n_tx=None):
    """Uniform-power capacity of one flat-fading realization, in b/s/Hz.

    Evaluates log2 det(I_N + (rho/M) H H^H), the eigenvalue sum
    sum_i log2(1 + (rho/M) lambda_i) in log-det form.
    """
    h = as_complex_matrix(h)
    if n_tx is None:
        n_tx = h.shape[1]
    elif n_tx != h.shape[1]:
        raise DimensionMismatchError(
            "channel has %d transmit columns but n_tx=%d was given" % (h.shape[1], n_tx)
        )
    scale = snr.rho / n_tx
    return float(_kernels.capacity_uniform_batch(h[np.newaxis], scale)[0])


def per_tone_mi(h_d, alloc, sigma_n2=1.0):
    """Mutual information of a single tone for an explicit power split.

    ``alloc`` is either a scalar (equal power per transmit antenna, input
    covariance alloc * I_M) or a :class:`PowerAllocation` over the
    descending eigenvalues of gram(h_d).  Returns b/s/Hz for this tone
    alone, not divided by the tone count.
    """
    h = as_complex_matrix(h_d)
    if sigma_n2 <= 0.0:
        raise ValueError("sigma_n2 must be positive, got %r" % (sigma_n2,))
    if isinstance(alloc, PowerAllocation):
        eigs = herm_eigvals(gram(h))
        if alloc.n_modes != eigs.values.shape[0]:
            raise DimensionMismatchError(
                "allocation covers %d modes but the channel has %d"
                % (alloc.n_modes, eigs.values.shape[0])
            )
        spent = math.fsum(alloc.mode_powers)
        if spent > alloc.total_power + _BUDGET_TOL * max(1.0, alloc.total_power):
            raise PowerBudgetExceededError(
                "allocation spends %.12g but the budget is %.12g"
                % (spent, alloc.total_power)
            )
        powers = np.asarray(alloc.mode_powers, dtype=np.float64)
        return float(np.sum(np.log1p(powers * eigs.values / sigma_n2)) / _LN2)
    per_antenna = float(alloc)
    if per_antenna < 0.0:
        raise ValueError("per-antenna power must be >= 0, got %r" % (per_antenna,))
    return float(_kernels.capacity_uniform_batch(h[np.newaxis], per_antenna / sigma_n2)[0])


def ofdm_mi_uniform(taps, n_tones, snr):
    """Tone-averaged mutual information with uniform power, in b/s/Hz.

    Mean over D of log2 det(I_N + (rho/M) H_D H_D^H) where H_D is the
    tone-D response of the tap set.  For a single tap all tones coincide
    and the result equals the flat-fading value on that tap exactly.
    """
    if n_tones < 1:
        raise ValueError("n_tones must be >= 1, got %d" % (n_tones,))
    scale = snr.rho / taps.n_tx
    return float(_kernels.ofdm_capacity_batch(taps.taps[np.newaxis], int(n_tones), scale)[0])


def corr_model_mi(profile, h_w, snr):
    """Mutual information of the reduced receive-correlated model.

    Evaluates log2 det(I_N + (rho/M) Lambda H_w H_w^H) where Lambda holds
    the eigenvalues of R = sum_l R_l for the profile and H_w is a white
    N x M matrix.  Computed as the uniform capacity of Lambda^{1/2} H_w,
    which has the same determinant.
    """
    h = as_complex_matrix(h_w)
    cfg = AntennaConfig(tx=h.shape[1], rx=h.shape[0])
    r_total = build_correlation(profile, cfg).sum(axis=0)
    eigs = herm_eigvals(r_total)
    colored = np.sqrt(eigs.values)[:, np.newaxis] * h
    scale = snr.rho / cfg.tx
    return float(_kernels.capacity_uniform_batch(colored[np.newaxis], scale)[0])


def waterfill(eigs, total_power, sigma_n2=1.0):
    """Exact water-filling over an eigenvalue spectrum.

    Sorts the eigenvalues descending and picks the largest prefix size k
    whose level mu = (P + sigma_n2 * sum_{i<=k} 1/lambda_i) / k clears
    every active floor sigma_n2 / lambda_i; the feasible prefix sizes are
    contiguous, so the largest feasible k is the exact optimum and no
    iteration is involved.  Accepts an EigenSpectrum or a plain sequence.
    """
    values = np.asarray(getattr(eigs, "values", eigs), dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("eigenvalues must be one-dimensional")
    if not (math.isfinite(total_power) and total_power > 0.0):
        raise ValueError("total_power must be positive, got %r" % (total_power,))
    if sigma_n2 <= 0.0:
        raise ValueError("sigma_n2 must be positive, got %r" % (sigma_n2,))
    order = np.argsort(-values, kind="stable")
    ranked = values[order]
    n_pos = int(np.count_nonzero(ranked > 0.0))
    if n_pos == 0:
        raise NoPositiveModesError("no positive eigenvalue to allocate power to")
    inv = sigma_n2 / ranked[:n_pos]
    prefix = np.cumsum(inv)
    sizes = np.arange(1, n_pos + 1, dtype=np.float64)
    levels = (total_power + prefix) / sizes
    # k = 1 is always feasible because total_power > 0
    k = int(np.nonzero(levels > inv)[0][-1]) + 1
    level = float((total_power + prefix[k - 1]) / k)
    ranked_powers = np.zeros(values.shape[0], dtype=np.float64)
    ranked_powers[:k] = np.maximum(level - inv[:k], 0.0)
    powers = np.empty_like(ranked_powers)
    powers[order] = ranked_powers
    return PowerAllocation(
        mode_powers=tuple(powers),
        water_level=level,
        total_power=float(total_power),
    )


def capacity_csit(h, total_power, sigma_n2=1.0):
    """Capacity of one realization when the transmitter knows the channel.

    Water-fills the eigenvalues of gram(h) and returns
    sum_i log2(1 + p_i lambda_i / sigma_n2).  A zero channel carries no
    information and returns 0.0 rather than raising.
    """
    h = as_complex_matrix(h)
    eigs = herm_eigvals(gram(h))
    if eigs.rank == 0:
        return 0.0
    alloc = waterfill(eigs, total_power, sigma_n2)
    powers = np.asarray(alloc.mode_powers, dtype=np.float64)
    return float(np.sum(np.log1p(powers * eigs.values / sigma_n2)) / _LN2)


def asymptotic_large_tx(profile, n_rx, rho_bar):
    """Many-transmit-antenna capacity limit, sum_i log2(1 + rho_bar * lambda_i(R)).

    As the transmit count grows with the receive count fixed, the scaled
    gram (1/M) H H^H hardens to R = sum_l R_l and the capacity becomes a
    deterministic function of R's eigenvalues.  The same expression also
    describes the high-SNR behaviour: at large rho_bar each term splits
    into log2(rho_bar) + log2(lambda_i), so the high-SNR reading is about
    which term dominates, not a different formula.
    """
    if not (math.isfinite(rho_bar) and rho_bar > 0.0):
        raise ValueError("rho_bar must be positive, got %r" % (rho_bar,))
    cfg = AntennaConfig(tx=1, rx=n_rx)
    r_total = build_correlation(profile, cfg).sum(axis=0)
    eigs = herm_eigvals(r_total)
    return float(np.sum(np.log1p(rho_bar * eigs.values)) / _LN2)


def low_snr_capacity(profile, n_rx, rho_bar):
    """Low-SNR capacity log2(1 + rho_bar * trace(R)).

    Depends on the correlation only through trace(R), which the tap-power
    normalization pins to the receive count, so at low SNR neither the
    delay spread nor the correlation shape moves the result.
    """
    if not (math.isfinite(rho_bar) and rho_bar > 0.0):
        raise ValueError("rho_bar must be positive, got %r" % (rho_bar,))
    cfg = AntennaConfig(tx=1, rx=n_rx)
    r_total = build_correlation(profile, cfg).sum(axis=0)
    trace_r = float(np.real(np.trace(r_total)))
    return math.log1p(rho_bar * trace_r) / _LN2
