"""Dark-state strong coupling in a dissipative cavity coupled to a high-Q cavity.

Modules
-------
hilbert    truncated Hilbert space, Hamiltonians, Liouvillian
effective  closed-form effective parameters and Rabi envelope
eigen      non-Hermitian one/two-excitation spectra
dynamics   master-equation evolution
probe      driven steady states, spectra, g2(0)
cli        scenario configs and the ``darkcqed`` command
"""

__version__ = "0.1.0"

from .effective import EffectiveParams, effective_params, resonance_delta2  # noqa: E402
from .hilbert import ProbeDrive, SystemParams  # noqa: E402

__all__ = ["SystemParams", "ProbeDrive", "EffectiveParams", "effective_params",
           "resonance_delta2", "__version__"]
