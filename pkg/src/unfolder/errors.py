"""Exception hierarchy shared by all unfolder modules."""


class UnfolderError(Exception):
    """Base class for every error raised by this package."""


class MoleculeFormatError(UnfolderError):
    pass


class MalformedRecord(MoleculeFormatError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingSection(MoleculeFormatError):
    pass


class DanglingBond(MoleculeFormatError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateAxis(UnfolderError):
    """The two atoms defining a rotation axis coincide."""


class EmptyChain(UnfolderError):
    pass


class IndexOutOfRange(UnfolderError):
    pass


class ZeroBaseline(UnfolderError):
    pass


class InvalidDiscretization(UnfolderError):
    pass


class UnboundVariable(UnfolderError):
    pass


class TooManyVariables(UnfolderError):
    pass


class NoFeasibleSample(UnfolderError):
    pass
