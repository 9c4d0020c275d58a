import decimal
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

import pyparsing as pp

from supbound import settings
from supbound.services.errors import FunctionSyntaxError
from supbound.services.maxpoly import FnAdd, FnConst, FnExpr, FnMax, FnMul, FnVar

logger = logging.getLogger(__name__)

_ALIASES = {"X": 0, "Y": 1, "Z": 2}

NUMBER = pp.Regex(r"\d+(\.\d+)?(/\d+)?").set_name("nonnegative rational")
VARIABLE = pp.Regex(r"X\d+|[XYZ](?![A-Za-z0-9_])").set_name("variable")
SQRT = pp.Suppress(pp.Keyword("sqrt")) + pp.Suppress("(") + NUMBER + pp.Suppress(")")
MAX = pp.Keyword("max")

_expr = pp.Forward()


def _sqrt(value: str) -> Fraction:
    q = _number(value)
    with decimal.localcontext() as ctx:
        ctx.prec = settings.APPROX_PRECISION
        root = (decimal.Decimal(q.numerator) / decimal.Decimal(q.denominator)).sqrt()
    return Fraction(root)


def _number(text: str) -> Fraction:
    return Fraction(text)


def _variable(text: str) -> FnVar:
    if text in _ALIASES:
        return FnVar(_ALIASES[text])
    index = int(text[1:])
    if index < 1:
        raise pp.ParseFatalException(text, 0, "variables are numbered from X1")
    return FnVar(index - 1)


def _power(tokens):
    base = tokens[0]
    if len(tokens) == 1:
        return base
    exponent = int(tokens[1])
    if exponent == 0:
        return FnConst(Fraction(1))
    return FnMul(tuple([base] * exponent))


def _product(tokens):
    factors = [tokens[0]]
    rest = list(tokens[1:])
    while rest:
        op, operand = rest[0], rest[1]
        rest = rest[2:]
        if op == "*":
            factors.append(operand)
        elif operand.value == 0:
            raise pp.ParseFatalException("", 0, "division by zero")
        else:
            factors.append(FnConst(1 / operand.value))
    return factors[0] if len(factors) == 1 else FnMul(tuple(factors))


def _sum(tokens):
    terms = list(tokens)
    return terms[0] if len(terms) == 1 else FnAdd(tuple(terms))


_constant = NUMBER.copy().set_parse_action(lambda t: FnConst(_number(t[0])))
_sqrt_constant = SQRT.copy().set_parse_action(lambda t: FnConst(_sqrt(t[0])))
_variable_ref = VARIABLE.copy().set_parse_action(lambda t: _variable(t[0]))
_max = (pp.Suppress(MAX) + pp.Suppress("(") + _expr + pp.ZeroOrMore(pp.Suppress(",") + _expr) + pp.Suppress(")"))
_max.set_parse_action(lambda t: FnMax(tuple(t)))
_atom = _sqrt_constant | _max | _constant | _variable_ref | (pp.Suppress("(") + _expr + pp.Suppress(")"))
_pow = (_atom + pp.Optional(pp.Suppress("^") + pp.Regex(r"\d+"))).set_parse_action(_power)
_divisor = NUMBER.copy().set_parse_action(lambda t: FnConst(_number(t[0])))
_prod = (_pow + pp.ZeroOrMore((pp.Literal("*") + _pow) | (pp.Literal("/") + _divisor))).set_parse_action(_product)
_expr <<= (_prod + pp.ZeroOrMore(pp.Suppress("+") + _prod)).set_parse_action(_sum)

FUNCTION = _expr
SYMBOL_NAME = pp.Regex(r"[A-Za-z0-9_][A-Za-z0-9_']*#?")
BINDING = SYMBOL_NAME("symbol") + pp.Suppress("=") + FUNCTION("fn")


def parse_fn(text: str, line: int = 1) -> FnExpr:
    """Parse one function in the ``max(...)`` / polynomial grammar."""
    try:
        return FUNCTION.parse_string(text.strip(), parse_all=True)[0]
    except (pp.ParseException, pp.ParseFatalException) as e:
        raise FunctionSyntaxError(message=e.msg, line=line, column=e.col)


@dataclass(frozen=True)
class FunctionBinding:
    symbol: str
    expr: FnExpr
    line: int
    approximate: bool = False


def parse_assignment_text(text: str) -> Dict[str, FunctionBinding]:
    """Lines ``symbol = fn`` with ``#`` comments; later bindings override earlier ones."""
    bindings: Dict[str, FunctionBinding] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = _strip_comment(raw)
        if not content:
            continue
        try:
            tokens = BINDING.parse_string(content, parse_all=True)
        except (pp.ParseException, pp.ParseFatalException) as e:
            raise FunctionSyntaxError(message=e.msg, line=lineno, column=e.col)
        name = tokens["symbol"].rstrip("#")
        if name in bindings:
            logger.warning(f"Symbol '{name}' bound twice, line {lineno} overrides line {bindings[name].line}")
        bindings[name] = FunctionBinding(
            symbol=name, expr=tokens["fn"], line=lineno, approximate="sqrt(" in content
        )
    return bindings


def _strip_comment(line: str) -> str:
    # '#' after a symbol name marks a dependency-pair symbol, elsewhere it opens a comment
    name, sep, rest = line.partition("=")
    if not sep:
        return line.split("#", 1)[0].strip()
    if "#" in name.rstrip().rstrip("#"):
        return name.split("#", 1)[0].strip()
    return f"{name.strip()} = {rest.split('#', 1)[0].strip()}".strip()


def render_assignment(functions: Dict[str, str], header: List[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.extend(f"{name} = {fn}" for name, fn in functions.items())
    return "\n".join(lines) + "\n"
