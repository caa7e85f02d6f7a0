"""Base value domain: naturals, TIME with infinity, and undefinedness.

Evaluation never raises on bad data; partial operations produce UNDEFINED,
and any comparison involving UNDEFINED is false.  Time values are naturals
extended with INFINITY; subtraction below zero is UNDEFINED.
"""

from __future__ import annotations


class _Infinity:
    """The single infinite TIME value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __deepcopy__(self, memo):
        return self


class _Undefined:
    """Evaluation outcome for partial functions; not a storable value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False

    def __deepcopy__(self, memo):
        return self


INFINITY = _Infinity()
UNDEFINED = _Undefined()


def is_defined(*vals):
    return all(v is not UNDEFINED for v in vals)


def t_add(a, b):
    """TIME addition; infinity absorbs."""
    if not is_defined(a, b):
        return UNDEFINED
    if a is INFINITY or b is INFINITY:
        return INFINITY
    return a + b


def t_sub(a, b):
    """TIME subtraction; inf - inf and results below zero are UNDEFINED."""
    if not is_defined(a, b):
        return UNDEFINED
    if b is INFINITY:
        return UNDEFINED
    if a is INFINITY:
        return INFINITY
    if a - b < 0:
        return UNDEFINED
    return a - b


def t_mul(k, a):
    """k * a for a natural k and TIME a."""
    if not is_defined(k, a):
        return UNDEFINED
    if a is INFINITY:
        return INFINITY if k > 0 else 0
    return k * a


def t_less(a, b):
    """a < b; false on UNDEFINED, finite < INFINITY."""
    if not is_defined(a, b):
        return False
    if a is INFINITY:
        return False
    if b is INFINITY:
        return True
    return a < b


def t_leq(a, b):
    if not is_defined(a, b):
        return False
    return a == b or t_less(a, b)


def t_max(a, b):
    if not is_defined(a, b):
        return UNDEFINED
    if a is INFINITY or b is INFINITY:
        return INFINITY
    return max(a, b)


def t_key(a):
    """Sort key placing finite values before INFINITY."""
    return (1, 0) if a is INFINITY else (0, a)


def canon(v):
    """Canonical, hashable, deterministic form of a stored value.

    Used for state hashing and trace output.  Sets are rendered sorted,
    mappings as sorted item tuples.
    """
    if isinstance(v, frozenset):
        return ("set",) + tuple(sorted((canon(x) for x in v), key=repr))
    if isinstance(v, tuple):
        return tuple(canon(x) for x in v)
    if v is INFINITY:
        return "INFINITY"
    if v is UNDEFINED:
        return "UNDEFINED"
    if hasattr(v, "canon"):
        return v.canon()
    return v
