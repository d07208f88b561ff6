"""Select the chord-exit kernel: compiled Cython core when built, numpy
fallback otherwise. Set HILBERTFLOW_PURE=1 to force the fallback."""
import os

from hilbertflow import _chords_py

if os.environ.get("HILBERTFLOW_PURE", "") not in ("", "0"):
    _impl = _chords_py
else:
    try:
        from hilbertflow import _chords_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _chords_py

ray_exit = _impl.ray_exit
ray_exit_batch = _impl.ray_exit_batch


def backend() -> str:
    """Name of the active kernel: "compiled" or "python"."""
    return _impl.BACKEND
