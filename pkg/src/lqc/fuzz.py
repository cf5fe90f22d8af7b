"""Random inputs for property tests.

``random_instance`` draws solver problems ``(U, D, L, C)`` over a handful
of atoms.  ``random_program`` writes small array-manipulating programs
that the checker must accept, together with the output a direct Python
model of the same operations predicts, so the interpreter can be tested
against something other than itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .constraints import LINEARLY, Atom, Impl, Simple, SimpleConstraint, Tensor, Wanted, With
from .mult import MANY, ONE

ATOM_POOL = (Atom("A"), Atom("B"), Atom("C"), LINEARLY)


@dataclass(frozen=True)
class Instance:
    U: tuple[Atom, ...]
    D: tuple[Atom, ...]
    L: tuple[Atom, ...]
    C: Wanted

    def given(self) -> SimpleConstraint:
        return SimpleConstraint(self.U, self.D + self.L)


def random_q(rng: random.Random, pool, max_linear: int = 2, p_u: float = 0.25) -> SimpleConstraint:
    U = tuple(a for a in pool if rng.random() < p_u)
    L = tuple(rng.choice(pool) for _ in range(rng.randint(0, max_linear)))
    return SimpleConstraint(U, L)


def random_wanted(rng: random.Random, pool, depth: int) -> Wanted:
    if depth == 0 or rng.random() < 0.3:
        return Simple(random_q(rng, pool, 2, 0.15))
    k = rng.random()
    if k < 0.4:
        return Tensor(random_wanted(rng, pool, depth - 1), random_wanted(rng, pool, depth - 1))
    if k < 0.65:
        return With(random_wanted(rng, pool, depth - 1), random_wanted(rng, pool, depth - 1))
    mult = ONE if rng.random() < 0.6 else MANY
    return Impl(mult, random_q(rng, pool, 2, 0.15), random_wanted(rng, pool, depth - 1))


def random_instance(rng: random.Random, max_atoms: int = 4, max_depth: int = 3) -> Instance:
    n = rng.randint(1, max_atoms)
    pool = list(ATOM_POOL[:n]) if rng.random() < 0.5 else rng.sample(ATOM_POOL, n)
    plain = [a for a in pool if a != LINEARLY]
    U = tuple(a for a in pool if rng.random() < 0.2)
    D = (LINEARLY,) * rng.randint(0, 2) if LINEARLY in pool else ()
    L = tuple(rng.choice(plain) for _ in range(rng.randint(0, 3))) if plain else ()
    return Instance(U, D, L, random_wanted(rng, pool, rng.randint(0, max_depth)))


# ---------------------------------------------------------------------------
# programs

SWAP = """\
swap :: RW n =o UArray Int n -> Int -> Int -> exists . () * (RW n)
swap arr i j =
  if i == j then pack ()
  else if i > j then swap arr j i
  else
    let pack (Ur (l, r)) = split arr (i + 1) ;
        pack (Ur aival) = lendMut l i (\\ai -> let pack (Ur v) = readRef ai in pack (Ur v)) ;
        pack (Ur ajval) = lendMut r (j - (i + 1)) (\\aj ->
          let pack (Ur v) = readRef aj ;
              pack () = writeRef aj aival
          in pack (Ur v)) ;
        pack () = lendMut l i (\\ai -> writeRef ai ajval) ;
        pack (Ur _) = join l r
    in pack ()
"""

BUMP = """\
bump :: RW n =o UArray Int n -> Int -> Int -> exists . () * (RW n)
bump arr i k =
  let pack (Ur v) = read arr i ;
      pack () = write arr i (v + k)
  in pack ()
"""

TOTAL = """\
total :: Read n =o UArray Int n -> Int -> Int -> exists . Ur Int * (Read n)
total arr i acc =
  if i >= length arr then pack (Ur acc)
  else let pack (Ur v) = read arr i in total arr (i + 1) (acc + v)
"""


def _lit(v: int) -> str:
    return str(v) if v >= 0 else f"(0 - {-v})"


@dataclass
class _Gen:
    rng: random.Random
    lines: list[str] = field(default_factory=list)
    arrays: dict[str, list[int]] = field(default_factory=dict)
    ints: dict[str, int] = field(default_factory=dict)
    output: list[str] = field(default_factory=list)
    helpers: set[str] = field(default_factory=set)
    counter: int = 0
    # array whose size variable a local signature's `n` currently names
    scoped_n: str | None = None

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def expr(self, depth: int = 2) -> tuple[str, int]:
        r = self.rng
        if depth == 0 or r.random() < 0.4:
            if self.ints and r.random() < 0.6:
                x = r.choice(sorted(self.ints))
                return x, self.ints[x]
            v = r.randint(0, 20)
            return str(v), v
        a, va = self.expr(depth - 1)
        b, vb = self.expr(depth - 1)
        op = r.choice("+-*")
        val = va + vb if op == "+" else va - vb if op == "-" else va * vb
        return f"({a} {op} {b})", val

    def stmt(self, s: str) -> None:
        self.lines.append(s)

    def alloc(self) -> None:
        a = self.fresh("arr")
        n = self.rng.randint(1, 4)
        self.stmt(f"pack (Ur {a}) = new {n}")
        cells = []
        for i in range(n):
            e, v = self.expr()
            self.stmt(f"pack () = write {a} {i} {e}")
            cells.append(v)
        self.arrays[a] = cells
        self.scoped_n = a

    def step(self) -> None:
        r = self.rng
        a = r.choice(sorted(self.arrays))
        cells = self.arrays[a]
        n = len(cells)
        i = r.randrange(n)
        k = r.randrange(10)
        if k == 0:
            e, v = self.expr()
            self.stmt(f"pack () = write {a} {i} {e}")
            cells[i] = v
        elif k == 1:
            x = self.fresh("x")
            self.stmt(f"pack (Ur {x}) = read {a} {i}")
            self.ints[x] = cells[i]
        elif k == 2:
            j = r.randrange(n)
            self.helpers.add("swap")
            self.stmt(f"pack () = swap {a} {i} {j}")
            cells[i], cells[j] = cells[j], cells[i]
        elif k == 3 and n >= 2:
            cut = r.randint(1, n - 1)
            lft, rgt = self.fresh("l"), self.fresh("r")
            self.stmt(f"pack (Ur ({lft}, {rgt})) = split {a} {cut}")
            e, v = self.expr()
            if r.random() < 0.5:
                j = r.randrange(cut)
                self.stmt(f"pack () = write {lft} {j} {e}")
                cells[j] = v
            else:
                j = r.randrange(n - cut)
                self.stmt(f"pack () = write {rgt} {j} {e}")
                cells[cut + j] = v
            self.stmt(f"pack (Ur _) = join {lft} {rgt}")
        elif k == 4:
            c, vc = self.expr(1)
            t = r.randint(-5, 25)
            e1, v1 = self.expr()
            e2, v2 = self.expr()
            self.stmt(f"pack () = if {c} > {_lit(t)} then write {a} {i} {e1} else write {a} {i} {e2}")
            cells[i] = v1 if vc > t else v2
        elif k == 5:
            e, v = self.expr()
            self.stmt(f"pack () = lendMut {a} {i} (\\c -> writeRef c {e})")
            cells[i] = v
        elif k == 6:
            ref, y = self.fresh("ref"), self.fresh("y")
            e, v = self.expr()
            self.stmt(f"pack (Ur {ref}) = newRef")
            self.scoped_n = None
            self.stmt(f"pack () = writeRef {ref} {e}")
            self.stmt(f"pack (Ur {y}) = readRef {ref}")
            self.stmt(f"() = freeRef {ref}")
            self.ints[y] = v
        elif k == 7:
            d = r.randint(-3, 3)
            self.helpers.add("bump")
            self.stmt(f"pack () = bump {a} {i} {_lit(d)}")
            cells[i] += d
        elif k == 8:
            e, v = self.expr()
            self.stmt(f"() = emit {e}")
            self.output.append(str(v))
        else:
            s = self.fresh("s")
            self.helpers.add("total")
            self.stmt(f"pack (Ur {s}) = total {a} 0 0")
            self.ints[s] = sum(cells)


def random_program(rng: random.Random, steps: int | None = None) -> tuple[str, str]:
    """Source text of an accepted program and the output it must print."""
    g = _Gen(rng)
    for _ in range(rng.randint(1, 3)):
        g.alloc()
    for _ in range(steps if steps is not None else rng.randint(2, 12)):
        if rng.random() < 0.1:
            g.alloc()
        g.step()
    names = sorted(g.arrays)
    for a in names:
        if a == g.scoped_n and rng.random() < 0.5:
            fr = g.fresh("fr")
            g.stmt(f"{fr} :: RW n =o ()")
            g.stmt(f"{fr} = free {a}")
            g.stmt(f"() = {fr}")
        else:
            g.stmt(f"() = free {a}")
    e, v = g.expr()
    parts = []
    for h, text in (("swap", SWAP), ("bump", BUMP), ("total", TOTAL)):
        if h in g.helpers:
            parts.append(text)
    body = " ;\n      ".join(g.lines)
    parts.append(f"main = linearly $\n  let {body}\n  in Ur {e}\n")
    expected = "".join(line + "\n" for line in g.output) + f"Ur {v if v >= 0 else f'({v})'}\n"
    return "\n".join(parts), expected
