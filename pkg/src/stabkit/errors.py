"""Exception types shared across the package."""


class StabkitError(Exception):
    """Base class for all package errors."""


class ParameterError(StabkitError, ValueError):
    """An input parameter is outside its admissible range."""


class CapExceededError(StabkitError):
    """A size cap (qubits, subspace dimension, graph vertices) was exceeded."""


class NoCandidateError(StabkitError):
    """The fidelity learner found no Lagrangian clique to test."""
