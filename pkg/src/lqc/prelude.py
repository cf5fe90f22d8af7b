"""Builtin signatures.

Every entry is written in the surface type syntax and parsed once, so the
table exercises the same grammar as user programs.  ``runtime`` names the
VM primitive implementing the entry, or is None for abstract names that
only exist to type-check examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .syntax import Scheme, parse_scheme
from .types import TApp, TCon, Type, map_type, spine

# name, signature, has a runtime implementation
_SOURCE: list[tuple[str, str, bool]] = [
    # arrays of atomic references
    ("new", "Linearly =o Int -> exists n. Ur (UArray a n) * (RW n)", True),
    ("write", "RW n =o UArray a n -> Int -> a -> exists . () * (RW n)", True),
    ("read", "Read n =o UArray a n -> Int -> exists . Ur a * (Read n)", True),
    ("free", "RW n =o UArray a n -> ()", True),
    # references
    ("newRef", "Linearly =o exists n. Ur (AtomRef a n) * (RW n)", True),
    ("readRef", "Read n =o AtomRef a n -> exists . Ur a * (Read n)", True),
    ("writeRef", "RW n =o AtomRef a n -> a -> exists . () * (RW n)", True),
    ("freeRef", "RW n =o AtomRef a n -> ()", True),
    # arrays of owned locations
    ("newPArray", "Linearly =o Int -> exists n. Ur (PArray (AtomRef a) n) * (RW n)", True),
    ("length", "PArray a n -> Int", True),
    ("lendMut",
     "RW n =o PArray a n -> Int -> (forall p. RW p =o a p -> exists . r * (RW p)) -o exists . r * (RW n)",
     True),
    ("lend",
     "Read n =o PArray a n -> Int -> (forall p. Read p =o a p -> exists . r * (Read p)) -o exists . r * (Read n)",
     True),
    ("split",
     "RW n =o PArray a n -> Int -> exists l r. Ur (PArray a l, PArray a r) * (RW l, RW r, Slices n l r)",
     True),
    ("join", "(Slices n l r, RW r, RW l) =o PArray a l -> PArray a r -> exists . Ur (PArray a n) * (RW n)", True),
    # the Linearly scope
    ("linearly", "(Linearly =o Ur r) -o Ur r", True),
    # abstract names for the small examples
    ("useC", "C =o Int", False),
    ("giveC", "(C => Int) -o Int", False),
    ("const", "a -o b -> a", True),
    # arithmetic and output
    ("+", "Int -> Int -> Int", True),
    ("-", "Int -> Int -> Int", True),
    ("*", "Int -> Int -> Int", True),
    ("==", "Int -> Int -> Bool", True),
    ("<=", "Int -> Int -> Bool", True),
    ("<", "Int -> Int -> Bool", True),
    (">=", "Int -> Int -> Bool", True),
    (">", "Int -> Int -> Bool", True),
    ("emit", "Int -> ()", True),
    ("shuffleAt", "Int -> Int -> Int", True),
]

SYNONYMS = {"UArray": 2}


def expand_synonyms(t: Type) -> Type:
    """``UArray a n`` is ``PArray (AtomRef a) n``."""

    def f(x: Type) -> Type | None:
        head, args = spine(x)
        if head == TCon("UArray"):
            if len(args) != 2:
                return None
            a, n = (expand_synonyms(y) for y in args)
            return TApp(TApp(TCon("PArray"), TApp(TCon("AtomRef"), a)), n)
        return None

    return map_type(t, f)


@dataclass(frozen=True)
class Builtin:
    name: str
    scheme: Scheme
    source: str
    runtime: bool


@lru_cache(maxsize=None)
def prelude() -> dict[str, Builtin]:
    table = {}
    for name, sig, runtime in _SOURCE:
        table[name] = Builtin(name, parse_scheme(sig), sig, runtime)
    return table


# Data constructors: name -> (type parameters, field types with multiplicities, result type)
# written as schemes over the surface types.
CONSTRUCTORS: dict[str, str] = {
    "Unit": "()",
    "Pair": "a -o b -o (a, b)",
    "Ur": "a -> Ur a",
    "True": "Bool",
    "False": "Bool",
}


@lru_cache(maxsize=None)
def constructors() -> dict[str, Scheme]:
    return {k: parse_scheme(v) for k, v in CONSTRUCTORS.items()}


# type constructor -> its data constructors, in declaration order
DATATYPES: dict[str, tuple[str, ...]] = {
    "Unit": ("Unit",),
    "Pair": ("Pair",),
    "Ur": ("Ur",),
    "Bool": ("True", "False"),
}

# Type constructors and their arities, for well-formedness checks.
TYCONS: dict[str, int] = {
    "Int": 0, "Bool": 0, "Unit": 0, "Pair": 2, "Ur": 1,
    "AtomRef": 2, "PArray": 2, "UArray": 2,
}

# Constraint names the checker accepts; RW is expanded by the parser.
ATOMS: dict[str, int] = {"Read": 1, "Write": 1, "Slices": 3, "Linearly": 0, "C": 0}
