"""Hot-loop kernels: compiled core with a pure-Python fallback.

The compiled extension (`_cykernels`, Cython) is used when importable;
otherwise the NumPy implementation (`_pykernels`) takes over.  Set
``MIMOCAP_KERNELS=py`` to force the fallback or ``MIMOCAP_KERNELS=cy`` to
require the extension.  ``BACKEND`` reports which one is active.
"""

import os

_choice = os.environ.get("MIMOCAP_KERNELS", "").strip().lower()

if _choice in ("py", "python"):
    from . import _pykernels as _impl
elif _choice in ("cy", "cython"):
    from . import _cykernels as _impl
elif _choice == "":
    try:
        from . import _cykernels as _impl
    except ImportError:
        from . import _pykernels as _impl
else:
    raise ImportError(
        "unrecognized MIMOCAP_KERNELS=%r (expected 'py' or 'cy')" % _choice
    )

BACKEND = _impl.BACKEND
philox_raw = _impl.philox_raw
sample_cgauss = _impl.sample_cgauss
sample_cgauss_batch = _impl.sample_cgauss_batch
logdet2_batch = _impl.logdet2_batch
capacity_uniform_batch = _impl.capacity_uniform_batch
ofdm_capacity_batch = _impl.ofdm_capacity_batch

__all__ = [
    "BACKEND",
    "philox_raw",
    "sample_cgauss",
    "sample_cgauss_batch",
    "logdet2_batch",
    "capacity_uniform_batch",
    "ofdm_capacity_batch",
]
