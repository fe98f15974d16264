from .ast import ContractAst
from .deps import DependenceRelation, compute_deps
from .errors import ContractError, ContractSyntaxError, ContractTypeError, Diagnostic, DuplicateNameError
from .parser import parse_contract
from .printer import print_contract

__all__ = [
    "ContractAst", "ContractError", "ContractSyntaxError", "ContractTypeError", "DependenceRelation",
    "Diagnostic", "DuplicateNameError", "compute_deps", "parse_contract", "print_contract",
]
