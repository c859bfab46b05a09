"""Exception types shared by all modules."""


class OfabsError(Exception):
    """Base class; the CLI maps these to exit code 4 unless noted."""


class NonStrictTransition(OfabsError):
    def __init__(self, state, inp):
        super().__init__(f"no successor for state {state!r} under input {inp!r}")
        self.state = state
        self.input = inp


class InitialSetViolatesOutputRespect(OfabsError):
    def __init__(self, output):
        super().__init__(f"output {output!r} is shared by initial and non-initial states")
        self.output = output


class UndeclaredIdentifier(OfabsError):
    pass


class ResourceBudgetExceeded(OfabsError):
    pass


class DomainMismatch(OfabsError):
    pass


class UnknownOutput(OfabsError):
    pass


class NotSupported(OfabsError):
    pass


class MapDomainMismatch(OfabsError):
    pass


class NonDeterministicKnowledge(OfabsError):
    pass


class GridViolatesOutputMap(OfabsError):
    def __init__(self, cell, outputs):
        super().__init__(f"grid cell {cell} meets outputs {sorted(outputs)}")
        self.cell = cell
        self.outputs = frozenset(outputs)


class UnknownModel(OfabsError):
    pass


class BadParams(OfabsError):
    pass
