"""Ray-cast kernel backend selection.

Prefers the compiled Cython kernel; falls back to the numpy implementation
when the extension is missing. Override with DCASIM_BACKEND=python or
DCASIM_BACKEND=compiled (the latter raises if the extension is absent).
"""

import os

_requested = os.environ.get("DCASIM_BACKEND", "").strip().lower()

if _requested == "python":
    from dcasim._kernels._raycast_py import cast_rays
    BACKEND = "python"
elif _requested == "compiled":
    from dcasim._kernels._raycast import cast_rays
    BACKEND = "compiled"
elif _requested in ("", "auto"):
    try:
        from dcasim._kernels._raycast import cast_rays
        BACKEND = "compiled"
    except ImportError:
        from dcasim._kernels._raycast_py import cast_rays
        BACKEND = "python"
else:
    raise ImportError(f"unknown DCASIM_BACKEND={_requested!r} "
                      "(expected 'python', 'compiled', or 'auto')")

__all__ = ["cast_rays", "BACKEND"]
