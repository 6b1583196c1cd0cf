"""Kernel backends: stream contract, capacity kernels, backend parity."""

import os
import subprocess
import sys

import numpy as np
import pytest

from mimocap._kernels import _pykernels
from mimocap.errors import CholeskyBreakdownError

try:
    from mimocap._kernels import _cykernels
except ImportError:
    _cykernels = None

BACKENDS = [_pykernels] + ([] if _cykernels is None else [_cykernels])

KEYS = [(123, 456), (0, 0), (2**64 - 1, 7), (42, 0), (42, 999983), (1, 2**64 - 1)]

_MASK = (1 << 64) - 1
_MULT = (0xD2E7470EE14C6C93, 0xCA5A826395121157)
_WEYL = (0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B)


@pytest.fixture(params=BACKENDS, ids=lambda mod: mod.BACKEND)
def kern(request):
    return request.param


def _reference_philox_words(seed, stream_id, nwords):
    """Arbitrary-precision transcription of the documented stream contract.

    Key [seed, stream_id]; 256-bit counter starting at zero, incremented
    low word first (with carry) before every block; ten rounds with the
    key bumped by the Weyl constants between rounds; the four round
    outputs emitted in order.
    """
    words = []
    counter = [0, 0, 0, 0]
    while len(words) < nwords:
        for i in range(4):
            counter[i] = (counter[i] + 1) & _MASK
            if counter[i]:
                break
        c = list(counter)
        k0, k1 = seed, stream_id
        for rnd in range(10):
            if rnd:
                k0 = (k0 + _WEYL[0]) & _MASK
                k1 = (k1 + _WEYL[1]) & _MASK
            p0 = _MULT[0] * c[0]
            p1 = _MULT[1] * c[2]
            c = [((p1 >> 64) ^ c[1] ^ k0), p1 & _MASK, ((p0 >> 64) ^ c[3] ^ k1), p0 & _MASK]
        words.extend(c)
    return np.array(words[:nwords], dtype=np.uint64)


def _reference_gauss(words):
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    radius = np.sqrt(-np.log(u[0::2]))
    return radius * np.exp(2j * np.pi * u[1::2])


def _random_stack(seed, trials, n, m):
    return _pykernels.sample_cgauss_batch(seed, 0, trials, n * m).reshape(trials, n, m)


class TestPhilox:
    def test_matches_reference_implementation(self, kern):
        for seed, stream_id in KEYS:
            got = kern.philox_raw(seed, stream_id, 23)
            want = _reference_philox_words(seed, stream_id, 23)
            assert got.dtype == np.uint64
            assert np.array_equal(got, want), (seed, stream_id)

    def test_matches_numpy_philox(self, kern):
        for seed, stream_id in KEYS:
            key = np.array([seed, stream_id], dtype=np.uint64)
            want = np.random.Philox(key=key).random_raw(64)
            assert np.array_equal(kern.philox_raw(seed, stream_id, 64), want)

    def test_word_count_not_multiple_of_block(self, kern):
        full = kern.philox_raw(3, 4, 11)
        assert np.array_equal(full[:5], kern.philox_raw(3, 4, 5))

    def test_zero_words(self, kern):
        assert kern.philox_raw(1, 2, 0).shape == (0,)

    def test_streams_differ(self, kern):
        a = kern.philox_raw(9, 0, 8)
        b = kern.philox_raw(9, 1, 8)
        assert not np.array_equal(a, b)

    @pytest.mark.skipif(_cykernels is None, reason="compiled backend not built")
    def test_uniform_words_bitwise_identical_across_backends(self):
        for seed, stream_id in KEYS:
            a = _pykernels.philox_raw(seed, stream_id, 257)
            b = _cykernels.philox_raw(seed, stream_id, 257)
            assert np.array_equal(a, b)


class TestGaussianSampling:
    def test_matches_documented_transform(self, kern):
        words = _reference_philox_words(11, 5, 2 * 40)
        want = _reference_gauss(words)
        got = kern.sample_cgauss(11, 5, 40)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_batch_rows_are_per_stream_draws(self, kern):
        batch = kern.sample_cgauss_batch(42, 5, 10, 12)
        assert batch.shape == (10, 12)
        for t in (0, 3, 9):
            assert np.array_equal(batch[t], kern.sample_cgauss(42, 5 + t, 12))

    def test_prefix_stability(self, kern):
        # a longer draw from the same stream starts with the shorter one
        short = kern.sample_cgauss(7, 3, 6)
        long = kern.sample_cgauss(7, 3, 24)
        assert np.array_equal(long[:6], short)

    def test_unit_variance(self, kern):
        draws = kern.sample_cgauss_batch(2024, 0, 400, 64)
        second_moment = np.mean(np.abs(draws) ** 2)
        assert abs(second_moment - 1.0) < 0.02
        assert abs(np.mean(draws.real)) < 0.02
        assert abs(np.mean(draws.imag)) < 0.02

    @pytest.mark.skipif(_cykernels is None, reason="compiled backend not built")
    def test_backends_agree_to_roundoff(self):
        a = _pykernels.sample_cgauss_batch(42, 0, 32, 48)
        b = _cykernels.sample_cgauss_batch(42, 0, 32, 48)
        assert np.max(np.abs(a - b)) < 1e-12


class TestLogdetKernels:
    def test_logdet_matches_eigensum(self, kern):
        h = _random_stack(101, 40, 5, 5)
        gram = h @ np.conjugate(np.swapaxes(h, -1, -2))
        got = kern.logdet2_batch(gram, 0.37)
        eigs = np.linalg.eigvalsh(gram)
        want = np.sum(np.log2(1.0 + 0.37 * eigs), axis=-1)
        assert np.max(np.abs(got - want) / np.abs(want)) < 1e-9

    def test_logdet_identity_and_zero(self, kern):
        eye = np.eye(3, dtype=np.complex128)[np.newaxis]
        assert np.allclose(kern.logdet2_batch(eye, 1.0), np.log2(2.0) * 3, atol=1e-12)
        zero = np.zeros((1, 3, 3), dtype=np.complex128)
        assert np.allclose(kern.logdet2_batch(zero, 5.0), 0.0, atol=0.0)

    def test_logdet_two_dimensional_input(self, kern):
        h = _random_stack(300, 1, 4, 4)[0]
        gram = h @ h.conj().T
        single = float(kern.logdet2_batch(gram, 1.0))
        stacked = float(kern.logdet2_batch(gram[np.newaxis], 1.0)[0])
        assert single == stacked

    def test_logdet_breakdown_raises(self, kern):
        bad = -np.eye(2, dtype=np.complex128)[np.newaxis]
        with pytest.raises(CholeskyBreakdownError):
            kern.logdet2_batch(bad, 2.0)

    def test_capacity_uniform_matches_gram_logdet(self, kern):
        h = _random_stack(55, 30, 4, 3)
        gram = h @ np.conjugate(np.swapaxes(h, -1, -2))
        a = kern.capacity_uniform_batch(h, 1.4)
        b = kern.logdet2_batch(gram, 1.4)
        assert np.max(np.abs(a - b)) < 1e-9

    def test_capacity_tall_and_wide_agree(self, kern):
        # det identity: capacity is the same for H and H^H at equal scale
        h = _random_stack(77, 10, 5, 2)
        hh = np.conjugate(np.swapaxes(h, -1, -2))
        a = kern.capacity_uniform_batch(h, 0.9)
        b = kern.capacity_uniform_batch(hh, 0.9)
        assert np.max(np.abs(a - b)) < 1e-9

    @pytest.mark.skipif(_cykernels is None, reason="compiled backend not built")
    def test_backends_agree_to_roundoff(self):
        h = _random_stack(1, 50, 4, 3)
        a = _pykernels.capacity_uniform_batch(h, 2.5)
        b = _cykernels.capacity_uniform_batch(h, 2.5)
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9


class TestOfdmKernel:
    def test_matches_per_tone_bruteforce(self, kern):
        taps = _pykernels.sample_cgauss_batch(9, 0, 12, 3 * 2 * 2).reshape(12, 3, 2, 2)
        n_tones = 8
        got = kern.ofdm_capacity_batch(taps, n_tones, 1.7)
        want = np.empty(12)
        for t in range(12):
            caps = []
            for d in range(n_tones):
                phase = np.exp(-2j * np.pi * d * np.arange(3) / n_tones)
                h_d = np.einsum("l,lnm->nm", phase, taps[t])
                gram = h_d @ h_d.conj().T
                eigs = np.linalg.eigvalsh(gram)
                caps.append(np.sum(np.log2(1.0 + 1.7 * eigs)))
            want[t] = np.mean(caps)
        assert np.max(np.abs(got - want)) < 1e-9

    def test_single_tap_equals_flat_exactly(self, kern):
        taps = _pykernels.sample_cgauss_batch(4, 0, 20, 1 * 3 * 3).reshape(20, 1, 3, 3)
        flat = kern.capacity_uniform_batch(taps[:, 0], 0.8)
        for n_tones in (1, 2, 64, 256):
            tone_avg = kern.ofdm_capacity_batch(taps, n_tones, 0.8)
            assert np.array_equal(tone_avg, flat), n_tones

    def test_single_tone_is_flat_on_tap_sum(self, kern):
        # n = 1 evaluates the zero-frequency response, the plain tap sum
        taps = _pykernels.sample_cgauss_batch(6, 0, 9, 2 * 2 * 2).reshape(9, 2, 2, 2)
        got = kern.ofdm_capacity_batch(taps, 1, 1.1)
        want = kern.capacity_uniform_batch(taps.sum(axis=1), 1.1)
        assert np.max(np.abs(got - want)) < 1e-9

    @pytest.mark.skipif(_cykernels is None, reason="compiled backend not built")
    def test_backends_agree_to_roundoff(self):
        taps = _pykernels.sample_cgauss_batch(9, 0, 16, 4 * 2 * 2).reshape(16, 4, 2, 2)
        a = _pykernels.ofdm_capacity_batch(taps, 16, 1.7)
        b = _cykernels.ofdm_capacity_batch(taps, 16, 1.7)
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9


class TestBackendSelection:
    def _backend_in_subprocess(self, value):
        env = dict(os.environ)
        if value is None:
            env.pop("MIMOCAP_KERNELS", None)
        else:
            env["MIMOCAP_KERNELS"] = value
        code = "import mimocap._kernels as k; print(k.BACKEND)"
        proc = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env
        )
        return proc

    def test_python_forced(self):
        proc = self._backend_in_subprocess("py")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "python"

    @pytest.mark.skipif(_cykernels is None, reason="compiled backend not built")
    def test_cython_forced(self):
        proc = self._backend_in_subprocess("cy")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "cython"

    def test_unknown_value_rejected(self):
        proc = self._backend_in_subprocess("fortran")
        assert proc.returncode != 0
        assert "MIMOCAP_KERNELS" in proc.stderr

    def test_default_resolves(self):
        proc = self._backend_in_subprocess(None)
        assert proc.returncode == 0
        assert proc.stdout.strip() in ("python", "cython")
