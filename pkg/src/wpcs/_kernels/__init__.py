"""Kernel backend selection.

The compiled extension is preferred when importable; set ``WPCS_KERNELS=python``
to force the pure-Python fallback (e.g. for benchmarking or debugging).
``BACKEND`` records which one is active.
"""

import os

if os.environ.get("WPCS_KERNELS", "").lower() == "python":
    from . import _pure as impl

    BACKEND = "python"
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as impl

        BACKEND = "python"

pa_priority = impl.pa_priority
pa_residual = impl.pa_residual
pa_energy = impl.pa_energy
pa_t_root = impl.pa_t_root
pa_total_energy = impl.pa_total_energy
pa_solve = impl.pa_solve
cr_d = impl.cr_d
cr_z = impl.cr_z
cr_root = impl.cr_root
