"""Exception types shared across the package."""


class PomcheckError(Exception):
    """Base class for all pomcheck errors."""


class ModelError(PomcheckError):
    """A model is structurally invalid or a builder argument is out of range."""


class LabelOutOfRange(ModelError):
    pass


class RockOffGrid(ModelError):
    pass


class ImpossibleObservation(PomcheckError):
    """Belief update conditioned on an observation with (near-)zero probability."""


class ModelSyntaxError(PomcheckError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateEntry(ModelSyntaxError):
    pass


class LtlParseError(PomcheckError):
    def __init__(self, position: int, message: str):
        super().__init__(f"position {position}: {message}")
        self.position = position


class UnsupportedNegation(PomcheckError):
    """Negation of an until with temporal operands has no dual in the grammar."""


class UnsupportedFragment(PomcheckError):
    """Formula falls outside the built-in convertible fragments."""


class HoaError(PomcheckError):
    pass


class NotDeterministic(HoaError):
    pass


class NotComplete(HoaError):
    pass


class UnsupportedAcceptance(HoaError):
    pass


class EmptyCycle(PomcheckError):
    pass


class PropositionMismatch(PomcheckError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(
            "automaton propositions not declared by the model: "
            + ", ".join(self.missing)
        )


class GridTooLarge(PomcheckError):
    pass


class PolicyUndefined(PomcheckError):
    pass


class PolicyModelMismatch(PomcheckError):
    pass
