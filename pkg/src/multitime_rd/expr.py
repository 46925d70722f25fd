"""Compile text expressions into dual-aware callables (config documents)."""

from __future__ import annotations

import sympy

from .dual import FUNCTIONS
from .errors import ConfigError


class CompiledExpression:
    """Callable built from ``source`` over the named ``symbols``.

    The compiled function only uses arithmetic operators and the lifted
    functions in :data:`multitime_rd.dual.FUNCTIONS`, so it accepts floats,
    arrays and :class:`~multitime_rd.dual.Dual` arguments.
    """

    def __init__(self, source: str, symbols: tuple[str, ...]):
        self.source = source
        self.symbols = tuple(symbols)
        local = {name: sympy.Symbol(name) for name in self.symbols}
        local["coth"] = sympy.coth
        try:
            parsed = sympy.sympify(source, locals=local)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ConfigError(f"cannot parse expression {source!r}: {exc}") from exc
        unknown = {str(s) for s in parsed.free_symbols} - set(self.symbols)
        if unknown:
            raise ConfigError(
                f"expression {source!r} uses unknown symbols {sorted(unknown)}; "
                f"allowed: {list(self.symbols)}"
            )
        self.expr = parsed
        self._fn = sympy.lambdify(
            [local[name] for name in self.symbols], parsed, modules=[FUNCTIONS]
        )

    def __call__(self, *args):
        out = self._fn(*args)
        return out

    def __repr__(self):
        return f"CompiledExpression({self.source!r}, {self.symbols!r})"
