# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo hot kernels.

Mirror of ``_pykernels`` with the same stream contract (see that module's
docstring): Philox-4x64-10 keyed by [seed, stream_id], counter starting at
zero and pre-incremented before every 4-word block, Box-Muller on
open-interval uniforms built from the top 53 bits of each word.  Uniform
words are bit-identical to the NumPy backend; floating-point results agree
to round-off.
"""

import numpy as np

from mimocap.errors import CholeskyBreakdownError

from libc.math cimport M_PI, cos, log, log2, sin, sqrt
from libc.stdint cimport uint64_t

cdef extern from *:
    """
    typedef unsigned __int128 mimocap_u128;
    static inline unsigned long long mimocap_mulhi64(unsigned long long a,
                                                     unsigned long long b) {
        return (unsigned long long)(((mimocap_u128)a * (mimocap_u128)b) >> 64);
    }
    """
    uint64_t mimocap_mulhi64(uint64_t a, uint64_t b) nogil

cdef extern from "complex.h" nogil:
    double creal(double complex z)
    double cimag(double complex z)
    double complex conj(double complex z)

BACKEND = "cython"

__all__ = [
    "BACKEND",
    "philox_raw",
    "sample_cgauss",
    "sample_cgauss_batch",
    "logdet2_batch",
    "capacity_uniform_batch",
    "ofdm_capacity_batch",
]

cdef uint64_t _M0 = 0xD2E7470EE14C6C93
cdef uint64_t _M1 = 0xCA5A826395121157
cdef uint64_t _W0 = 0x9E3779B97F4A7C15
cdef uint64_t _W1 = 0xBB67AE8584CAA73B
# 2**-53, scaling the top 53 bits of a word into (0, 1)
cdef double _U53 = 1.0 / 9007199254740992.0


cdef struct PhiloxState:
    uint64_t ctr[4]
    uint64_t key[2]
    uint64_t buf[4]
    int pos


cdef inline void philox_init(PhiloxState* s, uint64_t seed, uint64_t stream_id) nogil:
    s.ctr[0] = 0
    s.ctr[1] = 0
    s.ctr[2] = 0
    s.ctr[3] = 0
    s.key[0] = seed
    s.key[1] = stream_id
    s.pos = 4


cdef inline void philox_block(PhiloxState* s) nogil:
    cdef uint64_t c0 = s.ctr[0]
    cdef uint64_t c1 = s.ctr[1]
    cdef uint64_t c2 = s.ctr[2]
    cdef uint64_t c3 = s.ctr[3]
    cdef uint64_t k0 = s.key[0]
    cdef uint64_t k1 = s.key[1]
    cdef uint64_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        if r > 0:
            k0 += _W0
            k1 += _W1
        hi0 = mimocap_mulhi64(_M0, c0)
        lo0 = _M0 * c0
        hi1 = mimocap_mulhi64(_M1, c2)
        lo1 = _M1 * c2
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    s.buf[0] = c0
    s.buf[1] = c1
    s.buf[2] = c2
    s.buf[3] = c3


cdef inline uint64_t philox_next(PhiloxState* s) nogil:
    cdef uint64_t word
    if s.pos == 4:
        # counter is bumped before the block, low word first with carry
        s.ctr[0] += 1
        if s.ctr[0] == 0:
            s.ctr[1] += 1
            if s.ctr[1] == 0:
                s.ctr[2] += 1
                if s.ctr[2] == 0:
                    s.ctr[3] += 1
        philox_block(s)
        s.pos = 0
    word = s.buf[s.pos]
    s.pos += 1
    return word


cdef inline double complex gauss_entry(PhiloxState* s) nogil:
    cdef double u0 = (<double>(philox_next(s) >> 11) + 0.5) * _U53
    cdef double u1 = (<double>(philox_next(s) >> 11) + 0.5) * _U53
    cdef double radius = sqrt(-log(u0))
    cdef double theta = (2.0 * M_PI) * u1
    return radius * cos(theta) + 1j * (radius * sin(theta))


def philox_raw(uint64_t seed, uint64_t stream_id, Py_ssize_t nwords):
    """Raw 64-bit words of the (seed, stream_id) stream."""
    out = np.empty(nwords, dtype=np.uint64)
    cdef uint64_t[::1] view = out
    cdef PhiloxState s
    cdef Py_ssize_t i
    philox_init(&s, seed, stream_id)
    with nogil:
        for i in range(nwords):
            view[i] = philox_next(&s)
    return out


def sample_cgauss(uint64_t seed, uint64_t stream_id, Py_ssize_t count):
    """``count`` i.i.d. unit-variance circularly-symmetric complex Gaussians."""
    out = np.empty(count, dtype=np.complex128)
    cdef double complex[::1] view = out
    cdef PhiloxState s
    cdef Py_ssize_t i
    philox_init(&s, seed, stream_id)
    with nogil:
        for i in range(count):
            view[i] = gauss_entry(&s)
    return out


def sample_cgauss_batch(uint64_t seed, uint64_t stream0, Py_ssize_t trials, Py_ssize_t count):
    """Stacked draws: row t comes from stream ``stream0 + t``."""
    out = np.empty((trials, count), dtype=np.complex128)
    cdef double complex[:, ::1] view = out
    cdef PhiloxState s
    cdef Py_ssize_t t, i
    with nogil:
        for t in range(trials):
            philox_init(&s, seed, stream0 + <uint64_t>t)
            for i in range(count):
                view[t, i] = gauss_entry(&s)
    return out


cdef void gram_lower(const double complex* h, Py_ssize_t n, Py_ssize_t m,
                     double complex* g) nogil:
    # lower triangle of H H^H; that is all the factorization reads
    cdef Py_ssize_t i, j, k
    cdef double complex acc
    for i in range(n):
        for j in range(i + 1):
            acc = 0
            for k in range(m):
                acc = acc + h[i * m + k] * conj(h[j * m + k])
            g[i * n + j] = acc


cdef double chol_logdet2(const double complex* a, double complex* work,
                         Py_ssize_t n, double scale, bint* ok) nogil:
    """log2 det(I + scale*A) through an in-place lower Cholesky of the shift.

    Accumulates log2 of the squared pivots, which equals twice the log2 of
    the factor diagonal.  Sets ok[0] = False on a non-positive pivot.
    """
    cdef Py_ssize_t i, j, k
    cdef double complex acc
    cdef double piv, root, total = 0.0
    for i in range(n):
        for j in range(i + 1):
            work[i * n + j] = scale * a[i * n + j]
        work[i * n + i] = work[i * n + i] + 1.0
    for j in range(n):
        piv = creal(work[j * n + j])
        for k in range(j):
            acc = work[j * n + k]
            piv -= creal(acc) * creal(acc) + cimag(acc) * cimag(acc)
        if not piv > 0.0:
            ok[0] = False
            return 0.0
        total += log2(piv)
        root = sqrt(piv)
        work[j * n + j] = root
        for i in range(j + 1, n):
            acc = work[i * n + j]
            for k in range(j):
                acc = acc - work[i * n + k] * conj(work[j * n + k])
            work[i * n + j] = acc / root
    ok[0] = True
    return total


cdef double pairwise_sum(const double* x, Py_ssize_t n) nogil:
    # same splitting tree as the NumPy twin: exact for a power-of-two count
    # of identical values
    cdef Py_ssize_t half
    if n <= 2:
        if n == 2:
            return x[0] + x[1]
        if n == 1:
            return x[0]
        return 0.0
    half = n // 2
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half)


def logdet2_batch(a, double scale):
    """log2 det(I + scale*A) for a stack of Hermitian PSD matrices."""
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[np.newaxis]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError("expected a (batch, n, n) stack, got shape %r" % (arr.shape,))
    cdef Py_ssize_t batch = arr.shape[0]
    cdef Py_ssize_t n = arr.shape[1]
    out = np.empty(batch, dtype=np.float64)
    work = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] am = arr
    cdef double complex[:, ::1] wm = work
    cdef double[::1] om = out
    cdef Py_ssize_t b
    cdef Py_ssize_t bad = -1
    cdef bint ok = True
    with nogil:
        for b in range(batch):
            om[b] = chol_logdet2(&am[b, 0, 0], &wm[0, 0], n, scale, &ok)
            if not ok:
                bad = b
                break
    if bad >= 0:
        raise CholeskyBreakdownError(
            "matrix %d of the stack is not positive definite after the shift" % bad
        )
    if squeeze:
        return np.float64(out[0])
    return out


def capacity_uniform_batch(h, double scale):
    """log2 det(I + scale * H H^H) per channel matrix in the (T, N, M) stack."""
    arr = np.ascontiguousarray(h, dtype=np.complex128)
    if arr.ndim != 3:
        raise ValueError("expected a (batch, n, m) stack, got shape %r" % (arr.shape,))
    cdef Py_ssize_t batch = arr.shape[0]
    cdef Py_ssize_t n = arr.shape[1]
    cdef Py_ssize_t m = arr.shape[2]
    out = np.empty(batch, dtype=np.float64)
    gwork = np.empty((n, n), dtype=np.complex128)
    cwork = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] hm = arr
    cdef double complex[:, ::1] gm = gwork
    cdef double complex[:, ::1] cm = cwork
    cdef double[::1] om = out
    cdef Py_ssize_t b
    cdef Py_ssize_t bad = -1
    cdef bint ok = True
    with nogil:
        for b in range(batch):
            gram_lower(&hm[b, 0, 0], n, m, &gm[0, 0])
            om[b] = chol_logdet2(&gm[0, 0], &cm[0, 0], n, scale, &ok)
            if not ok:
                bad = b
                break
    if bad >= 0:
        raise CholeskyBreakdownError(
            "matrix %d of the stack is not positive definite after the shift" % bad
        )
    return out


def ofdm_capacity_batch(taps, Py_ssize_t n_tones, double scale):
    """Tone-averaged log2 det(I + scale * H_D H_D^H) per trial.

    ``taps`` has shape (T, L, N, M); tone D sees
    H_D = sum_l taps[:, l] * exp(-2j*pi*l*D/n_tones).
    """
    arr = np.ascontiguousarray(taps, dtype=np.complex128)
    if arr.ndim != 4:
        raise ValueError("expected a (batch, L, n, m) stack, got shape %r" % (arr.shape,))
    if n_tones < 1:
        raise ValueError("n_tones must be >= 1, got %d" % n_tones)
    cdef Py_ssize_t batch = arr.shape[0]
    cdef Py_ssize_t n_taps = arr.shape[1]
    cdef Py_ssize_t n = arr.shape[2]
    cdef Py_ssize_t m = arr.shape[3]
    out = np.empty(batch, dtype=np.float64)
    phase = np.empty((n_tones, n_taps), dtype=np.complex128)
    hwork = np.empty((n, m), dtype=np.complex128)
    gwork = np.empty((n, n), dtype=np.complex128)
    cwork = np.empty((n, n), dtype=np.complex128)
    tone_caps = np.empty(n_tones, dtype=np.float64)
    cdef double complex[:, :, :, ::1] tm = arr
    cdef double complex[:, ::1] pm = phase
    cdef double complex[:, ::1] hm = hwork
    cdef double complex[:, ::1] gm = gwork
    cdef double complex[:, ::1] cm = cwork
    cdef double[::1] tc = tone_caps
    cdef double[::1] om = out
    cdef double factor = -2.0 * M_PI / n_tones
    cdef double theta
    cdef double complex acc
    cdef Py_ssize_t b, d, l, e
    cdef Py_ssize_t bad = -1
    cdef bint ok = True
    with nogil:
        for d in range(n_tones):
            for l in range(n_taps):
                theta = factor * <double>(d * l)
                pm[d, l] = cos(theta) + 1j * sin(theta)
        for b in range(batch):
            for d in range(n_tones):
                for e in range(n * m):
                    acc = 0
                    for l in range(n_taps):
                        acc = acc + pm[d, l] * (&tm[b, l, 0, 0])[e]
                    (&hm[0, 0])[e] = acc
                gram_lower(&hm[0, 0], n, m, &gm[0, 0])
                tc[d] = chol_logdet2(&gm[0, 0], &cm[0, 0], n, scale, &ok)
                if not ok:
                    bad = b
                    break
            if not ok:
                break
            om[b] = pairwise_sum(&tc[0], n_tones) / <double>n_tones
    if bad >= 0:
        raise CholeskyBreakdownError(
            "realization %d is not positive definite after the shift" % bad
        )
    return out
