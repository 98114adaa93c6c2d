"""
SYK-type two-local Hamiltonians: ensembles, level statistics and gate costs.

This package builds disorder ensembles of qudit, clusters and overlapping
clusters SYK models, resolves their symmetry sectors, archives exact spectra
and computes random-matrix diagnostics and Trotter circuit costs.
"""

__version__ = "0.1.0"
__author__ = "syk-chaos-analysis developers"

from .utils import errors, operators, couplings, sectors, spectral, circuits, dataio
from .HamiltonianFactory import HamiltonianFactory, ModelSpec
from .EnsembleDataStore import EnsembleDataStore
from .EnsembleRunner import EnsembleRunner, RunConfig
from .SpectralAnalyzer import SpectralAnalyzer
