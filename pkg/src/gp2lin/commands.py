"""Command abstract syntax.

Derived forms never appear here: ``if C then P`` is ``If(C, P, Skip())``
and the short ``try`` variants fill the missing arms with ``Skip()``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union


@dataclass(frozen=True)
class Call:
    """Rule-set call.  A single name may also denote a procedure before inlining."""
    rules: Tuple[str, ...]


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class If:
    cond: "Command"
    then: "Command"
    else_: "Command"


@dataclass(frozen=True)
class Try:
    cond: "Command"
    then: "Command"
    else_: "Command"


@dataclass(frozen=True)
class Loop:
    body: "Command"


@dataclass(frozen=True)
class Or:
    left: "Command"
    right: "Command"


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Fail:
    pass


Command = Union[Call, Seq, If, Try, Loop, Or, Break, Skip, Fail]


def seq(*items: Command) -> Command:
    """Right-nested sequence, flattening nested sequences first."""
    flat = []
    for c in items:
        flat.extend(unseq(c))
    if not flat:
        return Skip()
    out = flat[-1]
    for c in reversed(flat[:-1]):
        out = Seq(c, out)
    return out


def unseq(c: Command) -> list:
    if isinstance(c, Seq):
        return unseq(c.first) + unseq(c.second)
    return [c]


def depth(c: Command) -> int:
    if isinstance(c, (Seq, Or)):
        a, b = (c.first, c.second) if isinstance(c, Seq) else (c.left, c.right)
        return 1 + max(depth(a), depth(b))
    if isinstance(c, (If, Try)):
        return 1 + max(depth(c.cond), depth(c.then), depth(c.else_))
    if isinstance(c, Loop):
        return 1 + depth(c.body)
    return 1


def rule_names(c: Command) -> set:
    if isinstance(c, Call):
        return set(c.rules)
    if isinstance(c, Seq):
        return rule_names(c.first) | rule_names(c.second)
    if isinstance(c, Or):
        return rule_names(c.left) | rule_names(c.right)
    if isinstance(c, (If, Try)):
        return rule_names(c.cond) | rule_names(c.then) | rule_names(c.else_)
    if isinstance(c, Loop):
        return rule_names(c.body)
    return set()
