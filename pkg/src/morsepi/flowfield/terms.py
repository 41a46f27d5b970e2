"""Symbolic base terms f0 compiled to numpy callables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from morsepi.exceptions import ScenarioError

# Constructors the parser emits for literals and unknown names
_PARSER_GLOBALS = {
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
    "Function": sympy.Function,
}

_FUNCTIONS = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "sqrt": sympy.sqrt,
    "tanh": sympy.tanh,
    "pi": sympy.pi,
}


@dataclass(frozen=True)
class CompiledTerm:
    """A scalar function on model coordinates with its coordinate gradient."""

    source: str
    expression: sympy.Expr
    symbols: tuple[sympy.Symbol, ...]
    _value: Callable = None
    _gradient: Callable = None

    def value(self, p: np.ndarray) -> float:
        return float(self._value(*np.atleast_1d(p)))

    def gradient(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(self._gradient(*np.atleast_1d(p)), dtype=float).reshape(-1)

    def bound(self, samples: np.ndarray) -> float:
        """Largest |f0| over sampled coordinates."""
        return max(abs(self.value(p)) for p in samples)


def compile_term(source: str, coordinate_names: tuple[str, ...]) -> CompiledTerm:
    """Parse an expression such as ``cos(theta1) + cos(theta2)``."""
    symbols = sympy.symbols(coordinate_names)
    symbols = tuple(symbols) if isinstance(symbols, (tuple, list)) else (symbols,)
    namespace = dict(_FUNCTIONS)
    namespace.update({s.name: s for s in symbols})
    try:
        expression = parse_expr(
            source,
            local_dict=namespace,
            global_dict=dict(_PARSER_GLOBALS),
            transformations=standard_transformations,
        )
    except Exception as e:
        raise ScenarioError(f"Cannot parse f_terms: {e}", field="f_terms") from e

    unknown = expression.free_symbols - set(symbols)
    unknown |= {f.func for f in expression.atoms(AppliedUndef)}
    if unknown:
        raise ScenarioError(
            f"Unknown symbols in f_terms: {sorted(str(s) for s in unknown)}", field="f_terms"
        )

    derivatives = [sympy.diff(expression, s) for s in symbols]
    return CompiledTerm(
        source=source,
        expression=expression,
        symbols=symbols,
        _value=sympy.lambdify(symbols, expression, modules="numpy"),
        _gradient=sympy.lambdify(symbols, derivatives, modules="numpy"),
    )
