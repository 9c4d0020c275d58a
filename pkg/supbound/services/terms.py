import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple

logger = logging.getLogger(__name__)

Position = Tuple[int, ...]
ROOT: Position = ()


class SymbolKind(str, Enum):
    CONSTRUCTOR = "constructor"
    DEFINED = "defined"


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: SymbolKind = SymbolKind.CONSTRUCTOR
    marked: bool = False

    @property
    def is_constructor(self) -> bool:
        return self.kind == SymbolKind.CONSTRUCTOR

    @property
    def is_defined(self) -> bool:
        return self.kind == SymbolKind.DEFINED

    @property
    def display_name(self) -> str:
        return f"{self.name}#" if self.marked else self.name

    def mark(self) -> "Symbol":
        if not self.is_defined:
            raise ValueError(f"only defined symbols can be marked, '{self.name}' is a constructor")
        return replace(self, marked=True)

    def unmark(self) -> "Symbol":
        return replace(self, marked=False)

    def __call__(self, *args: "Term") -> "App":
        return App(self, tuple(args))

    def __str__(self):
        return f"{self.display_name}/{self.arity}"


class Term(ABC):

    @abstractmethod
    def size(self) -> int:
        ...

    @abstractmethod
    def subst(self, s: Dict["Var", "Term"]) -> "Term":
        ...

    @abstractmethod
    def iter_vars(self) -> Iterator["Var"]:
        ...

    @abstractmethod
    def iter_positions(self) -> Iterator[Tuple[Position, "Term"]]:
        """Pre-order walk; positions come out in lexicographic order."""
        ...

    def variables(self) -> Tuple["Var", ...]:
        seen = {}
        for v in self.iter_vars():
            seen.setdefault(v, None)
        return tuple(seen)

    def contains_var(self, x: "Var") -> bool:
        return any(v == x for v in self.iter_vars())

    def is_ground(self) -> bool:
        return next(self.iter_vars(), None) is None

    def subterm_at(self, position: Position) -> "Term":
        term = self
        for index in position:
            term = term.args[index - 1]
        return term

    def replace_at(self, position: Position, new: "Term") -> "Term":
        if not position:
            return new
        head, rest = position[0], position[1:]
        args = list(self.args)
        args[head - 1] = args[head - 1].replace_at(rest, new)
        return App(self.symbol, tuple(args))

    def proper_subterms(self) -> Iterator["Term"]:
        for position, sub in self.iter_positions():
            if position:
                yield sub


@dataclass(frozen=True)
class Var(Term):
    name: str

    def size(self):
        return 1

    def subst(self, s):
        return s.get(self, self)

    def iter_vars(self):
        yield self

    def iter_positions(self):
        yield ROOT, self

    def symbols(self):
        return iter(())

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    symbol: Symbol
    args: Tuple[Term, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False, default=0)
    _size: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"'{self.symbol.display_name}' has arity {self.symbol.arity}, applied to {len(self.args)} argument(s)"
            )
        # terms are keys of the derivation memo tables
        object.__setattr__(self, "_hash", hash((self.symbol, self.args)))
        object.__setattr__(self, "_size", 1 + sum(a.size() for a in self.args))

    def __hash__(self):
        return self._hash

    def size(self):
        return self._size

    def subst(self, s):
        if not s:
            return self
        return App(self.symbol, tuple(arg.subst(s) for arg in self.args))

    def iter_vars(self):
        for arg in self.args:
            yield from arg.iter_vars()

    def iter_positions(self):
        yield ROOT, self
        for i, arg in enumerate(self.args, start=1):
            for position, sub in arg.iter_positions():
                yield (i,) + position, sub

    def symbols(self) -> Iterator[Symbol]:
        yield self.symbol
        for arg in self.args:
            yield from arg.symbols()

    @property
    def root(self) -> Symbol:
        return self.symbol

    def is_constructor_term(self) -> bool:
        return all(s.is_constructor for s in self.symbols())

    def mark_root(self) -> "App":
        return App(self.symbol.mark(), self.args)

    def __str__(self):
        if not self.args:
            return self.symbol.display_name
        return f"{self.symbol.display_name}({', '.join(str(a) for a in self.args)})"


def term_size(t: Term) -> int:
    return t.size()


def is_value(t: Term) -> bool:
    return isinstance(t, App) and t.is_constructor_term()


def render_position(position: Position) -> str:
    return "root" if not position else ".".join(str(i) for i in position)


@dataclass(frozen=True)
class Rule:
    lhs: App
    rhs: Term
    index: int = 0  # 1-based, as listed in the source

    @property
    def root(self) -> Symbol:
        return self.lhs.symbol

    def size(self) -> int:
        return self.lhs.size() + self.rhs.size()

    def variables(self) -> Tuple[Var, ...]:
        return self.lhs.variables()

    def rename(self, suffix: str) -> "Rule":
        renaming = {v: Var(f"{v.name}{suffix}") for v in self.lhs.variables()}
        return Rule(self.lhs.subst(renaming), self.rhs.subst(renaming), self.index)

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class Trs:
    signature: Tuple[Symbol, ...]
    rules: Tuple[Rule, ...]

    @property
    def constructors(self) -> Tuple[Symbol, ...]:
        return tuple(s for s in self.signature if s.is_constructor)

    @property
    def defined(self) -> Tuple[Symbol, ...]:
        return tuple(s for s in self.signature if s.is_defined)

    def symbol(self, name: str) -> Optional[Symbol]:
        return next((s for s in self.signature if s.name == name), None)

    def size(self) -> int:
        """Sum of |l| + |r| over all rules."""
        return sum(rule.size() for rule in self.rules)

    def __str__(self):
        return "\n".join(str(rule) for rule in self.rules)
