"""Hash-consing for immutable syntax trees.

Nodes built through ``Interned`` subclasses are unique per structure, so
structural equality is identity and memo tables keyed by nodes stay cheap
even when trees share subterms heavily (deep unfoldings, characteristic
formulas).
"""

from __future__ import annotations

import weakref


class Interned:
    _pool: "weakref.WeakValueDictionary[tuple, Interned]" = weakref.WeakValueDictionary()

    def __new__(cls, *args):
        key = (cls,) + tuple(_key(a) for a in args)
        node = Interned._pool.get(key)
        if node is None:
            node = super().__new__(cls)
            Interned._pool[key] = node
        return node

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self.__match_args__))


def _key(value):
    if isinstance(value, Interned):
        return id(value)
    if isinstance(value, tuple):
        return tuple(_key(v) for v in value)
    return value


def weak_memo(fn):
    """Memoize a one-argument function of interned nodes without keeping them alive."""
    cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    def wrapper(node):
        try:
            return cache[node]
        except KeyError:
            value = cache[node] = fn(node)
            return value

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper
