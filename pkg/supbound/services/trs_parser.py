import logging
from typing import Dict, List, Optional, Set, Tuple

import pyparsing as pp

from supbound.services.errors import (
    ArityConflict,
    NonPatternLhs,
    RhsVariableNotInLhs,
    TrsSyntaxError,
)
from supbound.services.terms import App, Rule, Symbol, SymbolKind, Term, Trs, Var

logger = logging.getLogger(__name__)

# Leading digits are admitted so numerals such as 0 can name constants.
IDENT = pp.Regex(r"[A-Za-z0-9_][A-Za-z0-9_']*").set_name("identifier")
LPAR, RPAR, COMMA = map(pp.Suppress, "(),")
ARROW = pp.Suppress(pp.Literal("->"))

_term = pp.Forward()
_term <<= pp.Group(
    IDENT("name") + pp.Optional(pp.Group(LPAR + _term + pp.ZeroOrMore(COMMA + _term) + RPAR)("args"))
)
RULE = _term("lhs") + ARROW + _term("rhs")
TERM = _term

# Raw syntax tree: (name, args or None when written without parentheses, line)
RawTerm = Tuple[str, Optional[list]]


def _to_raw(tokens) -> RawTerm:
    name = tokens["name"]
    if "args" in tokens:
        return name, [_to_raw(t) for t in tokens["args"]]
    return name, None


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_line(grammar, text: str, lineno: int):
    try:
        return grammar.parse_string(text, parse_all=True)
    except pp.ParseException as e:
        raise TrsSyntaxError(message=e.msg, line=lineno, column=e.col)


def _walk(raw: RawTerm):
    yield raw
    name, args = raw
    for arg in args or ():
        yield from _walk(arg)


def _build(raw: RawTerm, symbols: Dict[str, Symbol], variables: Set[str]) -> Term:
    name, args = raw
    if name in variables:
        return Var(name)
    return App(symbols[name], tuple(_build(a, symbols, variables) for a in args or ()))


def parse_trs(text: str) -> Trs:
    """Parse a TRS source.

    One rule ``lhs -> rhs`` per line, ``#`` comments, and an optional
    ``VARS x y z`` line that pins the variables. Without it, an identifier
    is a variable when it never carries arguments, does not start with a
    digit and is not the root of any lhs.
    """
    header_vars: Optional[Set[str]] = None
    raw_rules: List[Tuple[RawTerm, RawTerm, int]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        content = _strip_comment(line)
        if not content:
            continue
        if content.split()[0] == "VARS":
            header_vars = (header_vars or set()) | set(content.split()[1:])
            continue
        tokens = _parse_line(RULE, content, lineno)
        raw_rules.append((_to_raw(tokens["lhs"]), _to_raw(tokens["rhs"]), lineno))

    arities: Dict[str, Set[int]] = {}
    order: List[str] = []
    for lhs, rhs, _ in raw_rules:
        for name, args in list(_walk(lhs)) + list(_walk(rhs)):
            arities.setdefault(name, set()).add(len(args) if args is not None else 0)
            if name not in order:
                order.append(name)

    for name, used in arities.items():
        if len(used) > 1:
            raise ArityConflict(name, used)

    lhs_roots = {lhs[0] for lhs, _, _ in raw_rules}
    if header_vars is not None:
        variables = {name for name in header_vars if name in arities}
        for name in variables:
            if arities[name] != {0} or name in lhs_roots:
                raise TrsSyntaxError(f"variable '{name}' used as a function symbol", line=1, column=1)
    else:
        variables = {
            name for name, used in arities.items()
            if used == {0} and not name[0].isdigit() and name not in lhs_roots
        }

    symbols = {
        name: Symbol(
            name=name,
            arity=next(iter(arities[name])),
            kind=SymbolKind.DEFINED if name in lhs_roots else SymbolKind.CONSTRUCTOR,
        )
        for name in order if name not in variables
    }

    rules = []
    for index, (raw_lhs, raw_rhs, lineno) in enumerate(raw_rules, start=1):
        lhs = _build(raw_lhs, symbols, variables)
        rhs = _build(raw_rhs, symbols, variables)
        if not isinstance(lhs, App):
            raise TrsSyntaxError("left-hand side must be a function application", line=lineno, column=1)
        for arg in lhs.args:
            for position, sub in arg.iter_positions():
                if isinstance(sub, App) and sub.symbol.is_defined:
                    raise NonPatternLhs(sub.symbol.name, index)
        lhs_vars = set(lhs.variables())
        for v in rhs.variables():
            if v not in lhs_vars:
                raise RhsVariableNotInLhs(v.name, index)
        rules.append(Rule(lhs=lhs, rhs=rhs, index=index))

    trs = Trs(signature=tuple(symbols.values()), rules=tuple(rules))
    logger.debug(
        f"Parsed TRS with {len(trs.rules)} rule(s), constructors "
        f"{[str(s) for s in trs.constructors]}, defined {[str(s) for s in trs.defined]}"
    )
    return trs


def parse_term(text: str, trs: Trs) -> Term:
    """Parse a term over the signature of ``trs``; unknown bare identifiers are variables."""
    tokens = _parse_line(TERM, text.strip(), 1)
    raw = _to_raw(tokens[0])
    symbols = {s.name: s for s in trs.signature}
    variables = set()
    for name, args in _walk(raw):
        if name in symbols:
            expected = symbols[name].arity
            got = len(args) if args is not None else 0
            if expected != got:
                raise ArityConflict(name, {expected, got})
        elif args is None and not name[0].isdigit():
            variables.add(name)
        else:
            raise TrsSyntaxError(f"unknown symbol '{name}'", line=1, column=text.find(name) + 1)
    return _build(raw, symbols, variables)
