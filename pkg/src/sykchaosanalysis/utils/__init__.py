from . import errors
from . import operators
from . import couplings
from . import sectors
from . import spectral
from . import circuits
from . import dataio

__all__ = ["errors", "operators", "couplings", "sectors", "spectral", "circuits", "dataio"]
