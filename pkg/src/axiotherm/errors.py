"""Exception hierarchy for axiotherm."""


class AxiothermError(Exception):
    """Base class for all errors raised by the engine."""


class DomainError(AxiothermError, ValueError):
    """An energy, parameter or state lies outside the admissible domain."""


class UnknownModelError(AxiothermError, LookupError):
    """A model id could not be resolved in the catalog registry."""


class ModelInvariantError(AxiothermError):
    """A model violates a structural requirement (monotonicity, positive T, ...)."""


class BracketError(AxiothermError):
    """A root bracket does not straddle the target value."""


class ConvergenceError(AxiothermError):
    """An iterative kernel exhausted its refinement or iteration budget."""


class NonIntegrableEndpointError(DomainError):
    """An integration endpoint touches the ground state, where T vanishes."""


class MeterTooSmallError(DomainError):
    """The meter cannot absorb the requested entropy change without reaching its ground state."""


class ContractError(AxiothermError, ValueError):
    """A precondition on an operation's arguments was violated."""


class IrreversibilityError(ContractError):
    """A reversible process was required but an irreversible one was given."""


class CompositionError(ContractError):
    """Processes cannot be chained because their end states do not match."""


class ScenarioError(AxiothermError):
    """A scenario document is malformed or fails schema validation."""
