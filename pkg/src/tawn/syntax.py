"""Abstract syntax of sequential processes.

Process bodies are immutable trees built from the constructors below.
Guards and assignments carry host-level programs over valuations:

* a guard program maps a valuation to the finite list of extended
  valuations satisfying the guard (empty list = guard false);
* an assignment program maps a valuation to the assigned value, which
  may be UNDEFINED;
* message/data expressions map a valuation to a value or UNDEFINED.

Every node carries a `label` used in traces, monitors and the repair
diff.  Labels are unique within one process table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .values import UNDEFINED


class ModelError(Exception):
    """Structural error in a process model (caught at construction)."""


@dataclass(frozen=True, eq=False)
class SeqProc:
    label: str


@dataclass(frozen=True, eq=False)
class Call(SeqProc):
    name: str
    args: Callable  # Valuation -> tuple of values (UNDEFINED allowed)


@dataclass(frozen=True, eq=False)
class Guard(SeqProc):
    guard: Callable  # Valuation -> iterable of extended Valuations
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Assign(SeqProc):
    var: str
    expr: Callable  # Valuation -> value or UNDEFINED
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Choice(SeqProc):
    alternatives: tuple


@dataclass(frozen=True, eq=False)
class Broadcast(SeqProc):
    msg: Callable
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Groupcast(SeqProc):
    dests: Callable
    msg: Callable
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Unicast(SeqProc):
    dest: Callable
    msg: Callable
    then: SeqProc
    otherwise: SeqProc


@dataclass(frozen=True, eq=False)
class Send(SeqProc):
    msg: Callable
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Deliver(SeqProc):
    data: Callable
    body: SeqProc


@dataclass(frozen=True, eq=False)
class Receive(SeqProc):
    var: str
    body: SeqProc


@dataclass(frozen=True)
class CastInProgress:
    """Transmission in progress: still needs n..n+o time units.

    Unlike the static constructors this is created while stepping; the
    destination set shrinks to the nodes that stayed in range.
    """

    dests: frozenset
    msg: object
    n: int
    o: int
    then: SeqProc
    otherwise: SeqProc

    @property
    def label(self):
        return f"*cast[{self.then.label}]"


@dataclass(frozen=True)
class ProcessDef:
    name: str
    params: tuple
    body: SeqProc


class ProcessTable:
    """Named process definitions with guarded-recursion checking."""

    def __init__(self):
        self.defs: dict[str, ProcessDef] = {}
        self._labels: set[str] = set()

    def define(self, name: str, params: tuple, body: SeqProc):
        if name in self.defs:
            raise ModelError(f"process {name} defined twice")
        self.defs[name] = ProcessDef(name, tuple(params), body)

    def lookup(self, name: str) -> ProcessDef:
        try:
            return self.defs[name]
        except KeyError:
            raise ModelError(f"unknown process name {name!r}") from None

    def validate(self):
        """Check label uniqueness, call targets, and guardedness.

        An expression is guarded when every call of a process name occurs
        below a guard, an assignment, an action prefix or a unicast.
        Unguarded recursion is rejected here, never during stepping.
        """
        for pdef in self.defs.values():
            self._check_labels(pdef.body)
            self._check_guarded(pdef.body, guarded=False, where=pdef.name)

    def _check_labels(self, node):
        if node.label in self._labels:
            raise ModelError(f"duplicate line label {node.label!r}")
        self._labels.add(node.label)
        for child in _children(node):
            self._check_labels(child)

    def _check_guarded(self, node, guarded, where):
        if isinstance(node, Call):
            if node.name not in self.defs:
                raise ModelError(f"{where}: call of unknown process {node.name!r}")
            if not guarded:
                raise ModelError(f"{where}: unguarded call of {node.name!r}")
            return
        if isinstance(node, (Guard, Assign)):
            self._check_guarded(node.body, True, where)
        elif isinstance(node, (Broadcast, Groupcast, Send, Deliver, Receive)):
            self._check_guarded(node.body, True, where)
        elif isinstance(node, Unicast):
            self._check_guarded(node.then, True, where)
            self._check_guarded(node.otherwise, True, where)
        elif isinstance(node, Choice):
            for alt in node.alternatives:
                self._check_guarded(alt, guarded, where)


def _children(node):
    if isinstance(node, (Guard, Assign, Broadcast, Groupcast, Send, Deliver, Receive)):
        return (node.body,)
    if isinstance(node, Unicast):
        return (node.then, node.otherwise)
    if isinstance(node, Choice):
        return node.alternatives
    return ()


# ---------------------------------------------------------------------------
# Valuations

class Valuation:
    """Immutable partial map from variable names to values."""

    __slots__ = ("_d", "_hash")

    def __init__(self, d=None):
        self._d = dict(d) if d else {}
        self._hash = None

    def get(self, var):
        return self._d.get(var, UNDEFINED)

    def __contains__(self, var):
        return var in self._d

    def set(self, var, value) -> "Valuation":
        d = dict(self._d)
        d[var] = value
        return Valuation(d)

    def set_many(self, pairs) -> "Valuation":
        d = dict(self._d)
        d.update(pairs)
        return Valuation(d)

    def advance(self) -> "Valuation":
        """The valuation after one unit of time: only `now` changes."""
        now = self._d.get("now", UNDEFINED)
        if now is UNDEFINED:
            raise ModelError("valuation has no clock variable `now`")
        return self.set("now", now + 1)

    @property
    def now(self):
        return self._d.get("now", UNDEFINED)

    def items(self):
        return self._d.items()

    def canon(self):
        from .values import canon
        return tuple(sorted((k, canon(v)) for k, v in self._d.items()))

    def __eq__(self, other):
        return isinstance(other, Valuation) and self.canon() == other.canon()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.canon())
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in sorted(self._d.items()))
        return f"Valuation({inner})"
