"""Top-level declarations of a source program."""

from __future__ import annotations

from dataclasses import dataclass, field

from hrtc.syntax import Expr, Kind, Pattern, Type


@dataclass(frozen=True)
class DataDecl:
    name: str
    kind: Kind
    constructors: tuple[tuple[str, Type], ...]
    line: int = 0


@dataclass(frozen=True)
class TypeAlias:
    name: str
    kind: Kind
    body: Type
    line: int = 0


@dataclass(frozen=True)
class SigDecl:
    name: str
    type: Type
    line: int = 0


@dataclass(frozen=True)
class FunDecl:
    """A definition; ``body`` is the clauses desugared into one expression."""

    name: str
    clauses: tuple[tuple[tuple[Pattern, ...], Expr], ...]
    body: Expr
    line: int = 0


Decl = DataDecl | TypeAlias | SigDecl | FunDecl


@dataclass
class Program:
    decls: list[Decl] = field(default_factory=list)

    def signatures(self) -> dict[str, Type]:
        return {d.name: d.type for d in self.decls if isinstance(d, SigDecl)}

    def definitions(self) -> dict[str, FunDecl]:
        return {d.name: d for d in self.decls if isinstance(d, FunDecl)}
