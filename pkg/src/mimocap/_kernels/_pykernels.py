"""NumPy implementation of the Monte Carlo hot kernels.

The compiled twin in ``_cykernels.pyx`` provides the same functions with an
identical random-bit contract; ``mimocap._kernels`` selects one at import
time.  Uniform bit streams are bit-identical across the two backends, while
floating-point results agree to round-off (the transcendental functions may
differ in the last ulp).

Stream contract
---------------
A stream is a Philox-4x64-10 generator keyed by the two 64-bit words
``[seed, stream_id]`` with the 256-bit counter starting at zero and
pre-incremented before every 4-word block (this is exactly what
``numpy.random.Philox`` does).  Word ``2k`` and ``2k+1`` of a stream feed
entry ``k`` of a complex Gaussian draw through Box-Muller on open-interval
uniforms::

    u = ((word >> 11) + 0.5) * 2**-53          # u in (0, 1), both ends open
    h = sqrt(-ln(u_{2k})) * exp(2j*pi*u_{2k+1})

which gives unit total variance (real and imaginary parts each 1/2).
"""

import numpy as np

from ..errors import CholeskyBreakdownError

BACKEND = "python"


def philox_raw(seed, stream_id, nwords):
    """Raw 64-bit words of the (seed, stream_id) stream."""
    key = np.array([seed, stream_id], dtype=np.uint64)
    return np.random.Philox(key=key).random_raw(nwords)


def _open_unit(words):
    # top 53 bits -> (0, 1), both endpoints excluded
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _boxmuller(u):
    # u has an even trailing axis; pairs (2k, 2k+1) -> one complex value
    radius = np.sqrt(-np.log(u[..., 0::2]))
    return radius * np.exp(2j * np.pi * u[..., 1::2])


def sample_cgauss(seed, stream_id, count):
    """``count`` i.i.d. unit-variance circularly-symmetric complex Gaussians."""
    return _boxmuller(_open_unit(philox_raw(seed, stream_id, 2 * count)))


def sample_cgauss_batch(seed, stream0, trials, count):
    """Stacked draws: row t comes from stream ``stream0 + t``."""
    words = np.empty((trials, 2 * count), dtype=np.uint64)
    for t in range(trials):
        words[t] = philox_raw(seed, stream0 + t, 2 * count)
    return _boxmuller(_open_unit(words))


def logdet2_batch(a, scale):
    """log2 det(I + scale*A) for a stack of Hermitian PSD matrices.

    Inputs are trusted (no symmetry check); only the lower triangle is
    referenced by the factorization.
    """
    a = np.asarray(a)
    side = a.shape[-1]
    shifted = scale * a
    idx = np.arange(side)
    shifted[..., idx, idx] += 1.0
    try:
        chol = np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError as exc:
        raise CholeskyBreakdownError(str(exc)) from None
    diag = chol[..., idx, idx].real
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def capacity_uniform_batch(h, scale):
    """log2 det(I + scale * H H^H) per channel matrix in the (T, N, M) stack."""
    h = np.asarray(h, dtype=np.complex128)
    gram = h @ np.conjugate(np.swapaxes(h, -1, -2))
    return logdet2_batch(gram, scale)


def _pairwise_mean(vals):
    # binary-splitting sum matching the compiled kernel; exact for stacks of
    # identical values when the count is a power of two
    return _pairwise_sum(vals) / vals.shape[-1]


def _pairwise_sum(x):
    n = x.shape[-1]
    if n <= 2:
        return x.sum(axis=-1)
    half = n // 2
    return _pairwise_sum(x[..., :half]) + _pairwise_sum(x[..., half:])


def ofdm_capacity_batch(taps, n_tones, scale):
    """Tone-averaged log2 det(I + scale * H_D H_D^H) per trial.

    ``taps`` has shape (T, L, N, M); tone D sees
    H_D = sum_l taps[:, l] * exp(-2j*pi*l*D/n_tones).
    """
    taps = np.asarray(taps, dtype=np.complex128)
    trials, n_taps, n_rx, n_tx = taps.shape
    tone_idx = np.arange(n_tones)
    tap_idx = np.arange(n_taps)
    phase = np.exp((-2j * np.pi / n_tones) * np.outer(tone_idx, tap_idx))
    h_d = np.einsum("dl,tlnm->tdnm", phase, taps)
    flat = capacity_uniform_batch(h_d.reshape(trials * n_tones, n_rx, n_tx), scale)
    return _pairwise_mean(flat.reshape(trials, n_tones))
