"""The front half of the compiler: parse, infer, usage-check, generate, solve."""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import Wanted
from .errors import SolveError
from .generate import Generated, generate
from .oracle import BindingDerivation, infer_program, usage_check
from .solver import GivenContext, Solver, SolveResult
from .syntax import Program, parse


@dataclass
class Checked:
    derivation: BindingDerivation
    generated: Generated
    solved: SolveResult

    @property
    def name(self) -> str:
        return self.derivation.name

    @property
    def wanted(self) -> Wanted:
        return self.generated.wanted


def solve_binding(g: Generated, *, _oldest_first: bool = False) -> SolveResult:
    s = Solver(g.positions, _oldest_first=_oldest_first)
    out = s.solve(GivenContext(), g.wanted)
    if out:  # pragma: no cover - the empty context has no linear givens to leave over
        raise SolveError("UnconsumedLinear", "linear givens left over at top level")
    return SolveResult(out, s.evidence, s.trace)


def check_program(prog: Program, *, _oldest_first: bool = False) -> list[Checked]:
    """Check every binding in source order; the first error is raised."""
    out = []
    for bd in infer_program(prog):
        usage_check(bd)
        g = generate(bd)
        out.append(Checked(bd, g, solve_binding(g, _oldest_first=_oldest_first)))
    return out


def check_source(source: str, *, _oldest_first: bool = False) -> list[Checked]:
    return check_program(parse(source), _oldest_first=_oldest_first)
