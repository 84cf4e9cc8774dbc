"""Transport between finite reservoirs: reservoir thermodynamics, channel
spectra, coupled density-matrix/chemical-potential dynamics, analysis
formulas and a brute-force many-body oracle."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
