"""Wave and Schrödinger propagators on the Heisenberg group H_n, evaluated through
the joint spectrum of the sub-Laplacian and the central derivative."""

from .errors import HeisenbergWaveError
from .littlewood_paley import DyadicProfile, OperatorTag, build_profile
from .spectral_core import GroupParams, SpectralSymbol

__version__ = "0.1.0"

__all__ = ["GroupParams", "SpectralSymbol", "DyadicProfile", "OperatorTag", "build_profile",
           "HeisenbergWaveError", "__version__"]
