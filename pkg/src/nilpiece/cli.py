"""Command-line interface: ``nilpiece <subcommand> ...``.

Every subcommand prints JSON on stdout.  Commands that compute verdicts
exit with status 1 when any verdict fails; invalid input exits with 2.
The enumeration cap can be raised or lowered through NILPIECE_BUDGET.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .exactlin import Matrix, field_of_order
from .formspace import FormedSpace
from .gradings import GradedSpace, PieceLabel, enumerate_piece_labels, grading_from_partition
from .groups import BudgetExceeded


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2))


def _read(path: str) -> str:
    return Path(path).read_text()


def _int_list(text: str) -> list:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


@click.group()
def main():
    """Pieces of nilpotent and unipotent varieties over finite fields."""


@main.command()
@click.argument("kind", type=click.Choice(["GL", "Sp", "O"]))
@click.argument("dim", type=int)
def labels(kind, dim):
    """List the piece labels (partitions) for KIND of dimension DIM."""
    _emit([str(lab) for lab in enumerate_piece_labels(kind, dim)])


@main.command()
@click.option("--space", "space_file", required=True, type=click.Path(exists=True))
@click.option("--elem", "elem_file", required=True, type=click.Path(exists=True))
@click.option("--unipotent", is_flag=True, help="Treat the element as a unipotent group element.")
def classify(space_file, elem_file, unipotent):
    """Recover the filtration, label and subpiece of one element."""
    from .recovery import classify_nilpotent, classify_unipotent
    space = FormedSpace.from_text(_read(space_file))
    x = Matrix.from_text(_read(elem_file))
    try:
        ce = (classify_unipotent if unipotent else classify_nilpotent)(space, x)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(ce.to_json())


@main.command()
@click.option("--space", "space_file", type=click.Path(exists=True),
              help="Optional space descriptor; must agree with the grading's model.")
@click.option("--grading", "grading_file", required=True, type=click.Path(exists=True))
@click.option("--elem", "elem_file", required=True, type=click.Path(exists=True))
def witness(space_file, grading_file, elem_file):
    """Decide set membership of a degree-2 map, with a certificate when outside."""
    from .pieces import WitnessError, bang_report, commuting_witness, in_bang_set
    gs = GradedSpace.from_text(_read(grading_file))
    if space_file:
        sp = FormedSpace.from_text(_read(space_file))
        if (sp.kind, sp.dim, sp.field) != (gs.kind, gs.dim, gs.field) or sp.gram != gs.space.gram \
                or sp.quad != gs.space.quad:
            raise click.UsageError("the space does not match the grading's split model")
    A = Matrix.from_text(_read(elem_file))
    try:
        inside = in_bang_set(gs, A)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if inside:
        _emit({"in_set": True, "report": bang_report(gs, A)})
        return
    try:
        W = commuting_witness(gs, A)
    except WitnessError as exc:
        _emit({"in_set": False, "error": str(exc)})
        sys.exit(1)
    _emit({"in_set": False, "witness": W.to_text()})


@main.command()
@click.argument("kind", type=click.Choice(["GL", "Sp", "O"]))
@click.argument("dim", type=int)
@click.argument("q", type=int)
@click.option("--out", type=click.Path(), help="Write the JSON report here as well.")
@click.option("--csv", "csv_out", type=click.Path(), help="Write a per-label CSV table.")
@click.option("--workers", type=int, default=1, show_default=True)
def census(kind, dim, q, out, csv_out, workers):
    """Classify every nilpotent and unipotent element and check the counts."""
    from .census import run_census
    try:
        rep = run_census(kind, dim, q, workers=workers)
    except BudgetExceeded as exc:
        raise click.UsageError(f"{exc}; raise NILPIECE_BUDGET to proceed")
    text = rep.dumps()
    click.echo(text)
    if out:
        Path(out).write_text(text + "\n")
    if csv_out:
        Path(csv_out).write_text(rep.to_csv())
    if not rep.ok:
        sys.exit(1)


@main.command()
@click.argument("kind", type=click.Choice(["GL", "Sp", "O"]))
@click.argument("dim", type=int)
@click.option("--q", "q_text", default="2,3", show_default=True, help="Comma-separated field orders.")
def poly(kind, dim, q_text):
    """Fit per-label counts by polynomials in q and check their factor structure."""
    from .census import verify_polynomiality
    verdict = verify_polynomiality(kind, dim, _int_list(q_text))
    _emit(verdict.to_json())
    if not verdict.ok:
        sys.exit(1)


@main.command()
@click.argument("kind", type=click.Choice(["GL", "Sp", "O"]))
@click.option("--partition", required=True, help="Comma-separated parts, e.g. 3,1,1.")
@click.option("--q", type=int, default=2, show_default=True)
def orbits(kind, partition, q):
    """Orbits of the grading-preserving group on the set, with the f-classes."""
    from .census import orbit_oracle
    lab = PieceLabel(kind, tuple(sorted(_int_list(partition), reverse=True)))
    gs = grading_from_partition(lab, field_of_order(q))
    rep = orbit_oracle(gs)
    _emit(rep.to_json())
    if not rep.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
