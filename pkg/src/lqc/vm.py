"""A call-by-value interpreter for linted core programs.

Types are erased at run time; evidence tokens are ordinary (opaque)
values unless ``erase_tokens`` is set, in which case every token is the
same zero-size placeholder.  Arrays live in ``Block``s; a ``PArray`` value
is a ``View`` of a block, so splitting and joining never copy.
"""

from __future__ import annotations

import random
import sys
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

from .core import (
    CApp,
    CCase,
    CCon,
    CLam,
    CLet,
    CLetRec,
    CLit,
    CPack,
    CProgram,
    CTyLam,
    CUnpack,
    CVar,
    Term,
    builtin_types,
)
from .errors import RuntimeFault
from .types import CExists, TApp, TArrow, TCon, TForall, TToken, Type, spine

# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class ConV:
    name: str
    args: tuple = ()


UNIT = ConV("Unit")
TRUE = ConV("True")
FALSE = ConV("False")


@dataclass(frozen=True)
class Token:
    atom: str


ERASED = Token("")


@dataclass
class Closure:
    var: str
    body: Term
    env: dict


@dataclass
class Prim:
    """A curried primitive: ``fn`` runs once ``arity`` arguments arrived."""

    name: str
    arity: int
    fn: Callable[..., Any]
    args: tuple = ()


@dataclass(frozen=True)
class PackV:
    ev: Any
    val: Any


class _Unset:
    def __repr__(self) -> str:
        return "<unset>"


UNSET = _Unset()


@dataclass(eq=False)
class Block:
    cells: list
    freed: bool = False


@dataclass(frozen=True, eq=False)
class View:
    block: Block
    off: int
    len: int


@dataclass(frozen=True, eq=False)
class RefV:
    block: Block
    idx: int


def show_value(v: Any) -> str:
    if isinstance(v, bool):  # pragma: no cover - booleans are constructors
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, ConV):
        if v.name == "Unit":
            return "()"
        if v.name == "Pair":
            return f"({show_value(v.args[0])}, {show_value(v.args[1])})"
        if not v.args:
            return v.name
        inner = " ".join(_show_arg(a) for a in v.args)
        return f"{v.name} {inner}"
    if isinstance(v, Token):
        return f"<token {v.atom}>" if v.atom else "<token>"
    if isinstance(v, PackV):
        return f"pack({show_value(v.ev)}, {show_value(v.val)})"
    if isinstance(v, View):
        return f"<array of {v.len}>"
    if isinstance(v, RefV):
        return "<ref>"
    return "<function>"


def _show_arg(v: Any) -> str:
    s = show_value(v)
    if isinstance(v, ConV) and v.args and v.name != "Pair":
        return f"({s})"
    if isinstance(v, int) and v < 0:
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# evidence shapes


def ev_value(t: Type, erase: bool) -> Any:
    """A runtime evidence value of the given core evidence type."""
    head, args = spine(t)
    if isinstance(t, TToken):
        return ERASED if erase else Token(t.atom.name)
    if head == TCon("Unit"):
        return UNIT
    if head == TCon("Pair"):
        return ConV("Pair", (ev_value(args[0], erase), ev_value(args[1], erase)))
    if head == TCon("Ur"):
        return ConV("Ur", (ev_value(args[0], erase),))
    raise RuntimeFault("InternalError", f"not an evidence type: {t!r}")  # pragma: no cover


@lru_cache(maxsize=None)
def result_evidence(name: str) -> Type | None:
    """Evidence type carried by the package a builtin returns, if any."""
    t = builtin_types()[name]
    if isinstance(t, TForall):
        t = t.body
    while isinstance(t, TArrow):
        t = t.res
    return t.evidence if isinstance(t, CExists) else None


# ---------------------------------------------------------------------------
# the machine


class Machine:
    def __init__(self, program: CProgram, *, seed: int = 0, erase_tokens: bool = False) -> None:
        self.defs = {d.name: d.term for d in program.defs}
        self.seed = seed
        self.erase = erase_tokens
        self.output: list[str] = []
        self._globals: dict[str, Any] = {}
        self._perms: dict[int, list[int]] = {}
        self.prims = self._primitives()

    # -- helpers ------------------------------------------------------------

    def fault(self, kind: str, msg: str) -> RuntimeFault:
        return RuntimeFault(kind, msg)

    def pack(self, name: str, val: Any) -> PackV:
        t = result_evidence(name)
        assert t is not None
        return PackV(ev_value(t, self.erase), val)

    def cell(self, arr: Any, i: int, what: str) -> RefV:
        if not isinstance(arr, View):  # pragma: no cover - excluded by lint
            raise self.fault("InternalError", f"{what}: not an array")
        if arr.block.freed:
            raise self.fault("UseAfterFree", f"{what} on a freed array")
        if not 0 <= i < arr.len:
            raise self.fault("OutOfBounds", f"{what}: index {i} outside 0..{arr.len - 1}")
        return RefV(arr.block, arr.off + i)

    def get(self, r: RefV, what: str) -> Any:
        if r.block.freed:
            raise self.fault("UseAfterFree", f"{what} on a freed reference")
        v = r.block.cells[r.idx]
        if v is UNSET:
            raise self.fault("UnsetRef", f"{what} of a location that was never written")
        return v

    def put(self, r: RefV, v: Any, what: str) -> None:
        if r.block.freed:
            raise self.fault("UseAfterFree", f"{what} on a freed reference")
        r.block.cells[r.idx] = v

    def shuffle_at(self, n: int, i: int) -> int:
        if n not in self._perms:
            perm = list(range(n))
            random.Random(self.seed).shuffle(perm)
            self._perms[n] = perm
        perm = self._perms[n]
        if not 0 <= i < n:
            raise self.fault("OutOfBounds", f"shuffleAt: index {i} outside 0..{n - 1}")
        return perm[i]

    # -- primitives -----------------------------------------------------------

    def _primitives(self) -> dict[str, Prim]:
        m = self

        def new(ev, n):
            if n < 0:
                raise m.fault("OutOfBounds", f"new: negative size {n}")
            return m.pack("new", ConV("Ur", (View(Block([UNSET] * n), 0, n),)))

        def new_parray(ev, n):
            if n < 0:
                raise m.fault("OutOfBounds", f"newPArray: negative size {n}")
            return m.pack("newPArray", ConV("Ur", (View(Block([UNSET] * n), 0, n),)))

        def write(ev, arr, i, x):
            m.put(m.cell(arr, i, "write"), x, "write")
            return m.pack("write", UNIT)

        def read(ev, arr, i):
            return m.pack("read", ConV("Ur", (m.get(m.cell(arr, i, "read"), "read"),)))

        def free(ev, arr):
            if arr.block.freed:
                raise m.fault("UseAfterFree", "free of a freed array")
            arr.block.freed = True
            return UNIT

        def new_ref(ev):
            return m.pack("newRef", ConV("Ur", (RefV(Block([UNSET]), 0),)))

        def read_ref(ev, r):
            return m.pack("readRef", ConV("Ur", (m.get(r, "readRef"),)))

        def write_ref(ev, r, x):
            m.put(r, x, "writeRef")
            return m.pack("writeRef", UNIT)

        def free_ref(ev, r):
            if r.block.freed:
                raise m.fault("UseAfterFree", "freeRef of a freed reference")
            r.block.freed = True
            return UNIT

        def length(ev, arr):
            return arr.len

        def lend_with(name, inner_ev):
            def lend(ev, arr, i, k):
                ref = m.cell(arr, i, name)
                res = m.apply(m.apply(k, ev_value(inner_ev, m.erase)), ref)
                if not isinstance(res, PackV):  # pragma: no cover - excluded by lint
                    raise m.fault("InternalError", f"{name}: continuation did not return a package")
                return m.pack(name, res.val)

            return lend

        def split(ev, arr, i):
            if arr.block.freed:
                raise m.fault("UseAfterFree", "split of a freed array")
            if not 0 <= i <= arr.len:
                raise m.fault("OutOfBounds", f"split: index {i} outside 0..{arr.len}")
            left = View(arr.block, arr.off, i)
            right = View(arr.block, arr.off + i, arr.len - i)
            return m.pack("split", ConV("Ur", (ConV("Pair", (left, right)),)))

        def join(ev, left, right):
            if left.block is not right.block or left.off + left.len != right.off:
                raise m.fault("NonAdjacentJoin", "join of slices that are not adjacent")
            return m.pack("join", ConV("Ur", (View(left.block, left.off, left.len + right.len),)))

        def linearly(ev, k):
            return m.apply(k, ERASED if m.erase else Token("Linearly"))

        def no_runtime(name):
            def fn(*args):
                raise m.fault("NoRuntime", f"{name} has no runtime implementation")

            return fn

        def emit(ev, n):
            m.output.append(show_value(n))
            return UNIT

        def boolean(b: bool) -> ConV:
            return TRUE if b else FALSE

        from .prelude import prelude

        rw = TApp(TApp(TCon("Pair"), TToken(_atom("Read"))), TToken(_atom("Write")))
        table: dict[str, tuple[int, Callable]] = {
            "new": (2, new),
            "newPArray": (2, new_parray),
            "write": (4, write),
            "read": (3, read),
            "free": (2, free),
            "newRef": (1, new_ref),
            "readRef": (2, read_ref),
            "writeRef": (3, write_ref),
            "freeRef": (2, free_ref),
            "length": (2, length),
            "lendMut": (4, lend_with("lendMut", rw)),
            "lend": (4, lend_with("lend", TToken(_atom("Read")))),
            "split": (3, split),
            "join": (3, join),
            "linearly": (2, linearly),
            "const": (3, lambda ev, a, b: a),
            "+": (3, lambda ev, a, b: a + b),
            "-": (3, lambda ev, a, b: a - b),
            "*": (3, lambda ev, a, b: a * b),
            "==": (3, lambda ev, a, b: boolean(a == b)),
            "<=": (3, lambda ev, a, b: boolean(a <= b)),
            "<": (3, lambda ev, a, b: boolean(a < b)),
            ">=": (3, lambda ev, a, b: boolean(a >= b)),
            ">": (3, lambda ev, a, b: boolean(a > b)),
            "emit": (2, emit),
            "shuffleAt": (3, lambda ev, n, i: m.shuffle_at(n, i)),
            "dupL": (1, lambda t: ConV("Pair", (t, t))),
            "dropL": (1, lambda t: UNIT),
        }
        for name, b in prelude().items():
            if not b.runtime:
                table[name] = (1, no_runtime(name))
        assert set(prelude()) <= set(table)
        return {k: Prim(k, a, f) for k, (a, f) in table.items()}

    # -- evaluation -----------------------------------------------------------

    def apply(self, f: Any, a: Any) -> Any:
        if isinstance(f, Closure):
            env = dict(f.env)
            env[f.var] = a
            return self.eval(f.body, env)
        if isinstance(f, Prim):
            args = f.args + (a,)
            if len(args) == f.arity:
                return f.fn(*args)
            return Prim(f.name, f.arity, f.fn, args)
        raise self.fault("InternalError", f"applying a non-function {show_value(f)}")  # pragma: no cover

    def global_value(self, name: str) -> Any:
        if name in self._globals:
            return self._globals[name]
        if name in self.defs:
            v = self.eval(self.defs[name], {})
        elif name in self.prims:
            v = self.prims[name]
        else:
            raise self.fault("InternalError", f"unbound global {name}")
        self._globals[name] = v
        return v

    def eval(self, t: Term, env: dict) -> Any:
        while True:
            if isinstance(t, CVar):
                if t.name in env:
                    return env[t.name]
                return self.global_value(t.name)
            if isinstance(t, CLit):
                return t.value
            if isinstance(t, CCon):
                return _constructor(t.name)
            if isinstance(t, CLam):
                return Closure(t.var, t.body, env)
            if isinstance(t, CApp):
                f = self.eval(t.fun, env)
                a = self.eval(t.arg, env)
                if isinstance(f, Closure):
                    env = dict(f.env)
                    env[f.var] = a
                    t = f.body
                    continue
                return self.apply(f, a)
            if isinstance(t, CTyLam):
                t = t.body
                continue
            if isinstance(t, CPack):
                return PackV(self.eval(t.ev, env), self.eval(t.val, env))
            if isinstance(t, CUnpack):
                p = self.eval(t.rhs, env)
                env = dict(env)
                env[t.ev_var] = p.ev
                env[t.val_var] = p.val
                t = t.body
                continue
            if isinstance(t, CCase):
                v = self.eval(t.scrut, env)
                for alt in t.alts:
                    if isinstance(v, ConV) and alt.con == v.name:
                        env = dict(env)
                        env.update(zip(alt.vars, v.args))
                        t = alt.body
                        break
                else:
                    raise self.fault("InternalError", f"no alternative matches {show_value(v)}")  # pragma: no cover
                continue
            if isinstance(t, CLet):
                v = self.eval(t.rhs, env)
                env = dict(env)
                env[t.var] = v
                t = t.body
                continue
            if isinstance(t, CLetRec):
                env = dict(env)
                env[t.var] = self.eval(t.rhs, env)
                t = t.body
                continue
            raise TypeError(t)  # pragma: no cover


def _atom(name: str):
    from .constraints import Atom
    from .types import TVar

    return Atom(name, (TVar("p"),))


@lru_cache(maxsize=None)
def _constructor(name: str) -> Any:
    arities = {"Unit": 0, "True": 0, "False": 0, "Pair": 2, "Ur": 1}
    n = arities[name]
    if n == 0:
        return ConV(name)
    return Prim(name, n, lambda *args: ConV(name, tuple(args)))


@dataclass
class RunResult:
    value: Any
    output: list[str] = field(default_factory=list)

    def render(self) -> str:
        return "".join(line + "\n" for line in self.output) + show_value(self.value) + "\n"


def run(program: CProgram, entry: str = "main", *, seed: int = 0, erase_tokens: bool = False) -> RunResult:
    """Evaluate ``entry`` in a worker thread with a deep stack."""
    m = Machine(program, seed=seed, erase_tokens=erase_tokens)
    if entry not in m.defs:
        raise RuntimeFault("NoEntry", f"program has no {entry} binding")
    box: dict[str, Any] = {}

    def work() -> None:
        try:
            box["value"] = m.global_value(entry)
        except BaseException as e:  # re-raised on the calling thread
            box["error"] = e

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    try:
        sys.setrecursionlimit(max(old_limit, 200_000))
        threading.stack_size(512 * 1024 * 1024)
        t = threading.Thread(target=work)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        err = box["error"]
        if isinstance(err, RecursionError):
            raise RuntimeFault("StackOverflow", "evaluation recursed too deeply") from None
        raise err
    return RunResult(box["value"], m.output)
