"""Hilbert geometry and Lyapunov spectra of convex projective structures.

Core entry points:

- ``projlin``      unimodular normalization, eigen-splitting, charts, wedges
- ``domains``      convex bodies, chords, projective re-expression, JSON I/O
- ``metric``       Hilbert distance, Finsler norm, geodesic flow, transport
- ``groups``       group files, reduced words, shipped example groups
- ``domainbuild``  limit sets, orbit hulls, invariance diagnostics
- ``spectra``      periodic-orbit exponents and the exact transport map
- ``certify``      loxodromic + transversality (typicality) certificates
- ``boundary``     boundary-exponent fits vs spectral predictions
- ``cli``          the ``hilbertflow`` command
"""
from hilbertflow.kernels import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
