"""Exception hierarchy shared by every module in the package."""


class DensetsError(Exception):
    """Base class for all package errors."""


class BudgetExhausted(DensetsError):
    """An evaluation would need values or indices past the configured budget."""


class SetExhausted(DensetsError):
    """A finite set has fewer elements than the requested index."""


class DomainError(DensetsError, ValueError):
    """An argument lies outside the domain of the operation."""


class IndexCapExceeded(DensetsError):
    """A partition search ran past its level cap without placing the element."""

    def __init__(self, message, value=None, cap=None):
        super().__init__(message)
        self.value = value
        self.cap = cap


class FillExhausted(DensetsError):
    """A patched bijection ran out of fill values (finite patch set)."""


class InjectivityViolation(DensetsError):
    """Two inputs of a permutation map to the same value."""

    def __init__(self, witness, value):
        i, j = witness
        super().__init__(f"pi({i}) = pi({j}) = {value}")
        self.witness = witness
        self.value = value


class DSLError(DensetsError):
    """Base class for expression-language errors; carries a byte offset."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class DSLSyntaxError(DSLError):
    pass


class ArityError(DSLError):
    pass
