"""Stabilizer estimation by Bell difference sampling."""

from .errors import CapExceededError, NoCandidateError, ParameterError, StabkitError
from .f2lin import Subspace, span, symplectic_complement, symplectic_product
from .learners import distinguish, estimate_fidelity, eta_estimate, regime_check, tolerant_test
from .sampling import SampleMode, bell_difference_sample, weyl_twocopy_measure
from .stabilizer import CliffordTableau, StabilizerState, random_clifford
from .states import PureState, char_distribution, from_circuit, haar_random, weyl_distribution

__version__ = "0.1.0"
