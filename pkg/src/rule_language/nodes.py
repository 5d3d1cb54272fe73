"""
Rule syntax tree.

Nodes are frozen dataclasses, so two trees are equal exactly when they are
structurally identical. Blocks are tuples of statements. There is no loop node and
no call node: every program is a finite tree evaluated at most once per branch.
"""
from dataclasses import dataclass, fields, replace
from typing import Iterator, Optional, Tuple, Union


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class StateRef:
    pass


@dataclass(frozen=True)
class MilieuIndex:
    index: "Expr"


@dataclass(frozen=True)
class MilieuSum:
    pass


@dataclass(frozen=True)
class MilieuCount:
    pass


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, BoolLit, StateRef, MilieuIndex, MilieuSum, MilieuCount, Ident, Unary, Binary]


@dataclass(frozen=True)
class Let:
    name: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Optional[Tuple["Stmt", ...]] = None


@dataclass(frozen=True)
class Emit:
    expr: Expr


Stmt = Union[Let, If, Emit]


@dataclass(frozen=True)
class RuleAst:
    statements: Tuple[Stmt, ...]


Node = Union[Expr, Stmt, RuleAst]
PathStep = Union[str, int]
Path = Tuple[PathStep, ...]

EXPRESSION_TYPES = (IntLit, BoolLit, StateRef, MilieuIndex, MilieuSum, MilieuCount, Ident, Unary, Binary)
STATEMENT_TYPES = (Let, If, Emit)
REFERENCE_TYPES = (StateRef, MilieuIndex, MilieuSum, MilieuCount, Ident)


def get_at(root, path: Path):
    """Follow a path of field names and tuple indices from root"""
    node = root
    for step in path:
        node = node[step] if isinstance(step, int) else getattr(node, step)
    return node


def replace_at(root, path: Path, new):
    """Return a copy of root with the node at path replaced by new"""
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(step, int):
        items = list(root)
        items[step] = replace_at(items[step], rest, new)
        return tuple(items)
    return replace(root, **{step: replace_at(getattr(root, step), rest, new)})


def iter_nodes(root, path: Path = ()) -> Iterator[Tuple[Path, object]]:
    """Pre-order walk yielding (path, node) for every node and block below root"""
    yield path, root
    if isinstance(root, tuple):
        for i, item in enumerate(root):
            yield from iter_nodes(item, path + (i,))
        return
    for f in fields(root):
        child = getattr(root, f.name)
        if child is None or isinstance(child, (int, str, bool)):
            continue
        yield from iter_nodes(child, path + (f.name,))


def node_count(root) -> int:
    """Number of expression and statement nodes (blocks are not counted)"""
    return sum(1 for _, node in iter_nodes(root) if not isinstance(node, (tuple, RuleAst)))
