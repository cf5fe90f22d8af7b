"""Command-line driver.

Exit status: 0 when the input is accepted, 1 when it is rejected (the
diagnostic names the error class), 2 on an internal invariant failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .constraints import all_sites, is_duplicable, q_from_json, render_wanted, wanted_from_json, wanted_to_json
from .core import lint_program, parse_core, program_sexps, show_program, show_type
from .elaborate import elaborate
from .entail import OracleBudget, verdict
from .errors import LqcError
from .pipeline import Checked, check_source
from .solver import GivenContext, Solver
from .types import render
from .vm import run as vm_run


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, ensure_ascii=False))


def binding_json(c: Checked) -> dict:
    return {
        "binding": c.name,
        "constraint": wanted_to_json(c.wanted),
        "sites": [
            {"id": s.id, "mult": s.mult.ascii, "atom": s.atom.render(), "declared": s.declared.ascii,
             "evidence": _ev_json(c, s.id)}
            for s in all_sites(c.wanted)
        ],
        "trace": [t.to_json() for t in c.solved.trace],
    }


def _ev_json(c: Checked, sid: str):
    ev = c.solved.evidence.get(sid)
    return None if ev is None else {"source": ev.source, "given": ev.name}


def _scheme_text(c: Checked) -> str:
    d = c.derivation
    body = d.assume.render_context(render(d.type))
    if d.binders:
        return f"forall {' '.join(d.binders)}. {body}"
    return body


class _Guard:
    """Turn pipeline errors into diagnostics and exit codes."""

    def __init__(self, filename: str) -> None:
        self.filename = filename

    def __enter__(self) -> "_Guard":
        return self

    def __exit__(self, et, e, tb) -> bool:
        if e is None:
            return False
        if isinstance(e, LqcError):
            click.echo(e.render(self.filename), err=True)
            sys.exit(1)
        if isinstance(e, (SystemExit, KeyboardInterrupt, click.exceptions.Exit, click.ClickException)):
            return False
        click.echo(f"{self.filename}: internal error: {type(e).__name__}: {e}", err=True)
        sys.exit(2)


@click.group()
@click.version_option(__version__, prog_name="lqc")
def cli() -> None:
    """Check and run programs with linear constraints."""


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dump-json", is_flag=True, help="Print constraints, sites and solver trace as JSON.")
@click.option("--dump-derivation", is_flag=True, help="Print the typing derivations as JSON.")
@click.option("--oldest-first", "oldest_first", is_flag=True, hidden=True)
def check(file: str, dump_json: bool, dump_derivation: bool, oldest_first: bool) -> None:
    """Type-check FILE; exit 0 iff it is accepted."""
    with _Guard(file):
        checked = check_source(_read(file), _oldest_first=oldest_first)
        if dump_derivation:
            _emit_json([c.derivation.to_json() for c in checked])
        if dump_json:
            _emit_json([binding_json(c) for c in checked])
        if not (dump_json or dump_derivation):
            for c in checked:
                click.echo(f"{c.name} :: {_scheme_text(c)}")
            click.echo(f"{file}: ok")


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def constraints(file: str, as_json: bool) -> None:
    """Print the generated wanted constraint of every binding."""
    with _Guard(file):
        checked = check_source(_read(file))
        if as_json:
            _emit_json([binding_json(c) for c in checked])
            return
        for c in checked:
            click.echo(f"{c.name}: {render_wanted(c.wanted)}")
            for s in all_sites(c.wanted):
                click.echo(f"  {s.id}  {s.mult.ascii}.{s.atom.render()}")


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def trace(file: str, as_json: bool) -> None:
    """Print the solver steps for every binding."""
    with _Guard(file):
        checked = check_source(_read(file))
        if as_json:
            _emit_json([binding_json(c) for c in checked])
            return
        for c in checked:
            click.echo(f"{c.name}:")
            for step in c.solved.trace:
                click.echo(f"  {step.render()}")


@cli.command("elaborate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def elaborate_cmd(file: str, as_json: bool) -> None:
    """Print the explicit-evidence core program."""
    with _Guard(file):
        prog = elaborate(check_source(_read(file)))
        if as_json:
            _emit_json(program_sexps(prog))
        else:
            click.echo(show_program(prog), nl=False)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def lint(file: str) -> None:
    """Lint a .core file, or the elaboration of a source file."""
    with _Guard(file):
        text = _read(file)
        prog = parse_core(text) if file.endswith(".core") else elaborate(check_source(text))
        for name, t in lint_program(prog).items():
            click.echo(f"{name} : {show_type(t)}")
        click.echo(f"{file}: lint ok")


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, help="Seed for shuffleAt.")
@click.option("--entry", default="main", show_default=True)
@click.option("--erase-tokens", is_flag=True, help="Run with every evidence token erased.")
def run(file: str, seed: int, entry: str, erase_tokens: bool) -> None:
    """Evaluate the entry binding of FILE after elaborating and linting it."""
    with _Guard(file):
        text = _read(file)
        prog = parse_core(text) if file.endswith(".core") else elaborate(check_source(text))
        lint_program(prog)
        click.echo(vm_run(prog, entry, seed=seed, erase_tokens=erase_tokens).render(), nl=False)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-fuel", default=200_000, show_default=True, help="Search node budget.")
@click.option("--compare", is_flag=True, help="Also run the solver on the same problem.")
def oracle(file: str, max_fuel: int, compare: bool) -> None:
    """Decide an entailment given as JSON: {"given": {U, L}, "wanted": C}.

    Prints the verdict: true or false, or inconclusive when the budget
    runs out.  Duplicable atoms among the linear givens play the role of
    the solver's D component.
    """
    with _Guard(file):
        obj = json.loads(_read(file))
        given = q_from_json(obj.get("given", {}))
        wanted = wanted_from_json(obj["wanted"])
        click.echo(verdict(given, wanted, OracleBudget(max_nodes=max_fuel)))
        if compare:
            ctx = GivenContext.from_atoms(
                given.U, [a for a in given.L if is_duplicable(a)], [a for a in given.L if not is_duplicable(a)])
            try:
                left = Solver().solve(ctx, wanted)
                click.echo("solver: ok, leftover [" + ", ".join(g.atom.render() for g in left) + "]")
            except LqcError as e:
                click.echo(f"solver: rejected ({e.kind})")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="lqc", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 2 if e.exit_code not in (0, 1) else e.exit_code
    except SystemExit as e:
        return int(e.code or 0)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
