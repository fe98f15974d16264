from .ast import (CONTRACT, CONTRACT_SCOPE, ENSURES, REQUIRES, Atom, Falsum, Implies, Predicate, Scope,
                  SpecStatement)
from .evaluate import Bool3, ScopeMismatch, eval_in, eval_predicate
from .parser import SpecError, SpecKindError, SpecScopeError, SpecSyntaxError, SpecTypeError, parse_spec, parse_statement
from .printer import print_expr, print_predicate, print_statement
