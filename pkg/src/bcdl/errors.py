"""Exception hierarchy shared by every module."""

from __future__ import annotations


class BCDLError(Exception):
    """Base class for all library errors."""

    kind = "error"


class ParseError(BCDLError):
    kind = "syntax"

    def __init__(self, message: str, pos: int | None = None, line: int | None = None):
        self.pos = pos
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if pos is not None:
            where.append(f"col {pos + 1}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class UnknownNameError(ParseError):
    kind = "unknown-name"

    def __init__(self, name: str, expected: str, pos: int | None = None, line: int | None = None):
        self.name = name
        super().__init__(f"unknown {expected} {name!r}", pos, line)


class NonAtomicAntecedentError(ParseError):
    kind = "non-atomic-antecedent"

    def __init__(self, pos: int | None = None, line: int | None = None):
        super().__init__("non-atomic subsumption antecedent", pos, line)


class SignatureError(BCDLError):
    kind = "signature"


class UnboundVariableError(BCDLError):
    kind = "unbound-variable"

    def __init__(self, missing):
        self.missing = tuple(sorted(missing))
        super().__init__("unbound variables: " + ", ".join(self.missing))


class OpenFormulaError(BCDLError):
    kind = "open-formula"


class ModelError(BCDLError):
    kind = "model"


class IllFormedTermError(BCDLError):
    """An information term does not belong to the space of its formula."""

    kind = "ill-formed-input"

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message if position is None else f"{message} (position {position})")


class ITOverflow(BCDLError):
    """An information-term space is larger than the enumeration cap."""

    kind = "overflow"

    def __init__(self, cap: int, estimate: int, what: str = "information-term space"):
        self.cap = cap
        self.estimate = estimate
        super().__init__(f"{what} has {estimate} elements, exceeding cap {cap}")



class ProofError(BCDLError):
    """A proof tree fails to instantiate a rule of the calculus."""

    def __init__(self, kind: str, message: str, path: tuple[int, ...] = ()):
        self.kind = kind
        self.path = path
        loc = "root" if not path else "root." + ".".join(map(str, path))
        super().__init__(f"{kind} at {loc}: {message}")


class CompositionError(BCDLError):
    def __init__(self, kind: str, message: str, path: tuple[int, ...] = (), inner: Exception | None = None):
        self.kind = kind
        self.path = path
        self.inner = inner
        loc = "root" if not path else "root." + ".".join(map(str, path))
        super().__init__(f"{kind} at {loc}: {message}")


class TableError(BCDLError):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")
