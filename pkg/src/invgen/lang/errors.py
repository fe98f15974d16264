from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    severity: str = "error"

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class ContractError(Exception):
    """Base for diagnostics raised while reading a contract."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.diagnostic = Diagnostic(line, col, message)

    @property
    def diagnostics(self) -> list[Diagnostic]:
        return [self.diagnostic]

    def render(self, filename: str = "<input>") -> str:
        return self.diagnostic.render(filename)


class ContractSyntaxError(ContractError):
    pass


class ContractTypeError(ContractError):
    pass


class DuplicateNameError(ContractError):
    pass
