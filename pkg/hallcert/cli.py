"""Command-line interface for hallcert using Typer."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table
from sympy import factorint

from .core.context import RunContext
from .core.emitter import canonical_json, create_emitter, format_for
from .core.errors import BudgetExceeded, HallCertError, ReplayMismatch
from .core.field import field_for, make_field
from .core.loader import ManifestLoader, load_config
from .core.models import (
    BatchRow,
    BoundRecord,
    Certificate,
    Command,
    OrderRecord,
    RunConfig,
    TheoremReport,
    Verdict,
)
from .groups.basesize import base_size, certify, locate_hall, reg_count, theorem_check
from .groups.classical import build_group, group_order
from .groups.engine import kernel_HG
from .groups.hall import epi_condition
from .groups.witnesses import replay_certificate, subgroup_record

app = typer.Typer(
    name="hallcert",
    help="Hall subgroups of finite classical groups: constructions, witness certificates, base size and Reg",
    add_completion=False,
)

console = Console()
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


@dataclass
class Outcome:
    """Result of one run: exit code, the record to write, and rows for the summary table."""

    exit_code: int
    status: str
    record: Optional[BaseModel] = None
    summary: Dict[str, str] = field(default_factory=dict)


def _hall(config: RunConfig, ctx: RunContext):
    spec = config.group_spec()
    if not config.pi:
        raise ValueError("--pi is required for this command")
    G = build_group(spec, ctx.cap)
    H, provenance = locate_hall(G, config.pi, config.strategy, ctx.hall_budget)
    return spec, G, H, provenance


def run(config: RunConfig, ctx: Optional[RunContext] = None) -> Outcome:
    """Execute one command. Budget overruns and bad input come back as exit code 2."""
    ctx = ctx or RunContext.from_config(config)
    try:
        return _dispatch(config, ctx)
    except BudgetExceeded as e:
        return Outcome(EXIT_USAGE, "Budget", summary={"error": str(e)})
    except ReplayMismatch as e:
        return Outcome(EXIT_FAILED, "Mismatch", summary={"error": str(e)})
    except (HallCertError, ValidationError, ValueError, FileNotFoundError) as e:
        return Outcome(EXIT_USAGE, "error", summary={"error": str(e)})


def _dispatch(config: RunConfig, ctx: RunContext) -> Outcome:
    command = config.command

    if command == Command.FIELD:
        if config.q is None:
            raise ValueError("--q is required (with --f for an extension of the prime field q)")
        fs = make_field(config.q, config.f) if config.f > 1 else field_for(config.q)
        summary = {
            "order": str(fs.order),
            "characteristic": str(fs.p),
            "degree": str(fs.f),
            "modulus": str(list(fs.modulus)),
            "primitive element code": str(fs.tables.primitive),
        }
        return Outcome(EXIT_OK, "ok", fs, summary)

    if command == Command.GROUP_ORDER:
        spec = config.group_spec()
        order = group_order(spec)
        factors = {int(r): int(e) for r, e in factorint(order).items()}
        record = OrderRecord(group=spec, order=order, factors=factors)
        return Outcome(EXIT_OK, "ok", record, {"group": spec.label, "order": str(order)})

    if command == Command.EPI:
        verdict = epi_condition(config.group_spec(), config.pi)
        summary = {
            "verdict": verdict.status,
            "clause": verdict.case_label,
            "r": str(verdict.r),
            "tau": str(verdict.tau),
            "a": str(verdict.a),
            "b": str(verdict.b),
        }
        return Outcome(EXIT_OK, verdict.status, verdict, summary)

    if command == Command.HALL_FIND:
        spec, G, H, provenance = _hall(config, ctx)
        if H is None:
            return Outcome(EXIT_FAILED, "NotFound", summary={"group": spec.label})
        summary = {"group": spec.label, "|G|": str(G.order), "|H|": str(H.order), "found in": provenance}
        return Outcome(EXIT_OK, "Found", subgroup_record(G, H), summary)

    if command == Command.WITNESS_VERIFY:
        spec, G, H, _ = _hall(config, ctx)
        if H is None:
            return Outcome(EXIT_FAILED, "NoHall", summary={"group": spec.label})
        cert = certify(G, H, config.pi, ctx, config.witness)
        if cert is None:
            return Outcome(EXIT_FAILED, "NotFound", summary={"group": spec.label, "|H|": str(H.order)})
        return _certificate_outcome(cert)

    if command in (Command.BASE, Command.REG):
        spec, G, H, _ = _hall(config, ctx)
        if H is None:
            return Outcome(EXIT_FAILED, "NoHall", summary={"group": spec.label})
        if command == Command.BASE:
            bound = base_size(G, H, ctx.base_kmax, ctx.reg_node_budget)
            m, code = None, EXIT_OK if bound.exact else EXIT_FAILED
        else:
            bound = reg_count(G, H, ctx.reg_m, config.method, ctx.seed, ctx.reg_node_budget)
            m, code = ctx.reg_m, EXIT_OK
        record = BoundRecord(
            group=spec,
            pi=config.pi,
            quantity=command.value,
            m=m,
            hall_order=H.order,
            omega_size=G.order // H.order,
            kernel_order=kernel_HG(G, H).order,
            bound=bound,
        )
        label = "Base" if m is None else f"Reg({m})"
        return Outcome(code, str(bound), record, {"group": spec.label, "|H|": str(H.order), label: str(bound)})

    if command == Command.THEOREM_CHECK:
        if not config.pi:
            raise ValueError("--pi is required for theorem-check")
        report = theorem_check(config.group_spec(), config.pi, ctx, config.method, config.strategy, config.witness)
        return _report_outcome(report)

    if command == Command.REPLAY:
        if config.replay is None:
            raise ValueError("a certificate file is required")
        cert = Certificate.model_validate_json(Path(config.replay).read_text(encoding="utf-8"))
        again = replay_certificate(cert)
        outcome = _certificate_outcome(again)
        outcome.summary["replay"] = "identical"
        return outcome

    raise ValueError(f"Unknown command {command}")


def _certificate_outcome(cert: Certificate) -> Outcome:
    summary = {
        "group": cert.group.label,
        "|H|": str(cert.hall.order),
        "conjugates": str(len(cert.witnesses)),
        "intersection": str(cert.intersection_order),
        "|H_G|": str(cert.kernel_order),
        "|Z(G)|": str(cert.center_order),
        "verdict": cert.verdict.value,
    }
    code = EXIT_FAILED if cert.verdict == Verdict.FAILED else EXIT_OK
    return Outcome(code, cert.verdict.value, cert, summary)


_REPORT_EXIT = {"Verified": EXIT_OK, "Budget": EXIT_USAGE, "OutOfScope": EXIT_USAGE}


def _report_outcome(report: TheoremReport) -> Outcome:
    summary = {
        "group": report.group.label,
        "pi": str(report.pi),
        "E_pi": report.epi.status if report.epi else "",
        "|H|": str(report.hall_order),
        "certificate": report.certificate.verdict.value if report.certificate else "",
        "Base": str(report.base_size) if report.base_size else "",
        f"Reg({report.reg_m})": str(report.reg) if report.reg else "",
        "status": report.status,
    }
    for note in report.notes:
        summary.setdefault("note", note)
    return Outcome(_REPORT_EXIT.get(report.status, EXIT_FAILED), report.status, report, summary)


# ---------------------------------------------------------------------------
# Commands

def _setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _build_config(command: Command, config_file: Optional[Path], **flags: Any) -> RunConfig:
    flags = {k: str(v) if isinstance(v, Path) else v for k, v in flags.items() if v is not None}
    flags["command"] = command
    try:
        if config_file is not None:
            return load_config(config_file, flags)
        return RunConfig(**flags)
    except (ValidationError, ValueError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_USAGE)


def _finish(outcome: Outcome, out: Optional[Path]) -> None:
    if outcome.summary:
        table = Table(title="Summary")
        table.add_column("Item", style="cyan")
        table.add_column("Value", style="magenta")
        for key, value in outcome.summary.items():
            if key != "error":
                table.add_row(key, value)
        console.print(table)
    if "error" in outcome.summary:
        console.print(f"[red]Error: {outcome.summary['error']}[/red]")
    if outcome.record is not None:
        if out is not None:
            try:
                create_emitter(format_for(out), [outcome.record]).emit(out)
            except (OSError, ValueError) as e:
                console.print(f"[red]Error writing {out}: {e}[/red]")
                raise typer.Exit(EXIT_USAGE)
            console.print(f"\nSaved to: [bold]{out}[/bold]")
        elif outcome.exit_code != EXIT_USAGE:
            console.print(canonical_json(outcome.record), markup=False, highlight=False)
    colour = "green" if outcome.exit_code == EXIT_OK else "yellow" if outcome.exit_code == EXIT_FAILED else "red"
    console.print(f"[{colour}]{outcome.status}[/{colour}]")
    raise typer.Exit(outcome.exit_code)


def _execute(command: Command, config_file: Optional[Path], **flags: Any) -> None:
    config = _build_config(command, config_file, **flags)
    ctx = RunContext.from_config(config)
    console.print(f"[bold blue]hallcert {command.value}[/bold blue]")
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task = progress.add_task(f"Running {command.value}...", total=None)
        outcome = run(config, ctx)
        progress.remove_task(task)
    _finish(outcome, Path(config.out) if config.out else None)


FAMILY = typer.Option(None, "--family", help="GL, SL, GU, SU, GSp, Sp, GO+, GO-, GOo, O+, SO-, ...")
DIM = typer.Option(None, "--n", help="Matrix dimension")
FIELD_ORDER = typer.Option(None, "--q", help="Field order")
PI = typer.Option(None, "--pi", help="Comma-separated primes, e.g. 2,5")
CAP = typer.Option(None, "--cap", help="Enumeration budget (elements)")
SEED = typer.Option(None, "--seed", help="Search seed")
OUT = typer.Option(None, "--out", "-o", help="Output file (.json, .html)")
STRATEGY = typer.Option(None, "--strategy", help="Hall search: structural or exhaustive")
CONFIG = typer.Option(None, "--config", "-c", help="YAML file whose keys mirror the flags", exists=True, dir_okay=False)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging")):
    """Hall subgroups of finite classical groups."""
    _setup_logging(verbose)


@app.command("field")
def field_command(
    q: Optional[int] = FIELD_ORDER,
    f: Optional[int] = typer.Option(None, "--f", help="Extension degree over the prime field q"),
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Show the field F_q (or F_{q^f}): modulus and primitive element."""
    _execute(Command.FIELD, config, q=q, f=f, out=out)


@app.command("group-order")
def group_order_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Order of a classical group from its order formula."""
    _execute(Command.GROUP_ORDER, config, family=family, n=n, q=q, out=out)


@app.command("epi")
def epi_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Decide whether the group has a Hall pi-subgroup for odd pi or 2 in pi, 3 not in pi."""
    _execute(Command.EPI, config, family=family, n=n, q=q, pi=pi, out=out)


@app.command("hall-find")
def hall_find_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    strategy: Optional[str] = STRATEGY,
    cap: Optional[int] = CAP,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Find a Hall pi-subgroup in the enumerated group."""
    _execute(Command.HALL_FIND, config, family=family, n=n, q=q, pi=pi, strategy=strategy, cap=cap, out=out)


@app.command("witness-verify")
def witness_verify_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    witness: Optional[str] = typer.Option(
        None, "--witness", help="sp4, search, linear_odd_n, orth_odd, orth_even, orth_11_12 or circulant_remark"
    ),
    kmax: Optional[int] = typer.Option(None, "--kmax", help="Most conjugates the greedy search may use"),
    seed: Optional[int] = SEED,
    cap: Optional[int] = CAP,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Certify that conjugates of a Hall subgroup intersect in the center."""
    _execute(
        Command.WITNESS_VERIFY, config,
        family=family, n=n, q=q, pi=pi, witness=witness, kmax=kmax, seed=seed, cap=cap, out=out,
    )


@app.command("base")
def base_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    kmax: Optional[int] = typer.Option(None, "--kmax", help="Largest base size tried"),
    cap: Optional[int] = CAP,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Base size of the action on the cosets of a Hall pi-subgroup."""
    _execute(Command.BASE, config, family=family, n=n, q=q, pi=pi, kmax=kmax, cap=cap, out=out)


@app.command("reg")
def reg_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    m: Optional[int] = typer.Option(None, "--m", help="Tuple length"),
    method: Optional[str] = typer.Option(None, "--method", help="exact or lower-bound"),
    seed: Optional[int] = SEED,
    cap: Optional[int] = CAP,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Number of regular orbits on m-tuples of cosets of a Hall pi-subgroup."""
    _execute(Command.REG, config, family=family, n=n, q=q, pi=pi, m=m, method=method, seed=seed, cap=cap, out=out)


@app.command("theorem-check")
def theorem_check_command(
    family: Optional[str] = FAMILY,
    n: Optional[int] = DIM,
    q: Optional[int] = FIELD_ORDER,
    pi: Optional[str] = PI,
    method: Optional[str] = typer.Option(None, "--method", help="Reg method: exact or lower-bound"),
    strategy: Optional[str] = STRATEGY,
    witness: Optional[str] = typer.Option(None, "--witness", help="Witness source (default: sp4 for GSp_4, else search)"),
    kmax: Optional[int] = typer.Option(None, "--kmax", help="Most conjugates / base points tried"),
    m: Optional[int] = typer.Option(None, "--m", help="Tuple length for Reg (default 5)"),
    seed: Optional[int] = SEED,
    cap: Optional[int] = CAP,
    out: Optional[Path] = OUT,
    config: Optional[Path] = CONFIG,
):
    """Hall subgroup, witness certificate, Base and Reg(5) for one instance."""
    _execute(
        Command.THEOREM_CHECK, config,
        family=family, n=n, q=q, pi=pi, method=method, strategy=strategy, witness=witness,
        kmax=kmax, m=m, seed=seed, cap=cap, out=out,
    )


@app.command("replay")
def replay_command(
    certificate: Path = typer.Argument(..., help="Certificate JSON to replay", exists=True, dir_okay=False),
    out: Optional[Path] = OUT,
):
    """Recompute a certificate and check it is identical."""
    _execute(Command.REPLAY, None, replay=str(certificate), out=out)


def _run_row(config: RunConfig) -> BatchRow:
    """One manifest row; any error is captured in the row."""
    group = f"{config.family}_{config.n}({config.q})" if config.family else ""
    row = BatchRow(
        name=config.name or "",
        command=config.command.value,
        group=group,
        pi=",".join(str(r) for r in config.pi),
        status="error",
        exit_code=EXIT_USAGE,
    )
    try:
        outcome = run(config)
        if outcome.record is not None and config.out:
            create_emitter(format_for(Path(config.out)), [outcome.record]).emit(Path(config.out))
    except Exception as e:
        logger.exception(f"row {row.name} failed")
        row.error = str(e)
        return row
    row.status = outcome.status
    row.exit_code = outcome.exit_code
    row.error = outcome.summary.get("error", "")
    record = outcome.record
    if isinstance(record, TheoremReport):
        row.verdict = record.certificate.verdict.value if record.certificate else ""
        row.base_size = str(record.base_size) if record.base_size else ""
        row.reg = str(record.reg) if record.reg else ""
    elif isinstance(record, Certificate):
        row.verdict = record.verdict.value
    elif isinstance(record, BoundRecord):
        target = "base_size" if record.quantity == Command.BASE.value else "reg"
        setattr(row, target, str(record.bound))
    return row


def run_batch(configs: List[RunConfig], jobs: int = 1) -> List[BatchRow]:
    """Rows in manifest order, whatever the number of workers."""
    if jobs <= 1 or len(configs) <= 1:
        return [_run_row(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_row, configs))


@app.command("batch")
def batch_command(
    manifest: str = typer.Argument(..., help="Manifest YAML file, or the name of a built-in manifest"),
    out: Path = typer.Option(Path("hallcert-batch.csv"), "--out", "-o", help="Summary file (.csv or .html)"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Worker processes"),
):
    """Run every instance of a manifest and write one summary row per instance."""
    loader = ManifestLoader()
    try:
        loaded = loader.resolve(manifest)
    except ValueError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_USAGE)

    console.print(f"[bold blue]hallcert batch[/bold blue] {loaded.meta.name}: {len(loaded.instances)} instance(s)")
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task = progress.add_task(f"Running with {jobs} worker(s)...", total=None)
        rows = run_batch(loaded.instances, jobs)
        progress.remove_task(task)

    try:
        create_emitter(format_for(out), rows).emit(out)
    except (OSError, ValueError) as e:
        console.print(f"[red]Error writing {out}: {e}[/red]")
        raise typer.Exit(EXIT_USAGE)

    table = Table(title="Batch summary")
    for column in ("name", "group", "pi", "status", "exit", "base", "reg"):
        table.add_column(column, style="cyan" if column == "name" else None)
    for row in rows:
        table.add_row(row.name, row.group, row.pi, row.status, str(row.exit_code), row.base_size, row.reg)
    console.print(table)
    console.print(f"\nSummary saved to: [bold]{out}[/bold]")
    raise typer.Exit(EXIT_OK)


@app.command("list-manifests")
def list_manifests():
    """List the built-in batch manifests."""
    loader = ManifestLoader()
    try:
        loader.load_builtin_manifests()
    except ValueError as e:
        console.print(f"[red]Error loading manifests: {e}[/red]")
        raise typer.Exit(EXIT_USAGE)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Manifest", style="cyan")
    table.add_column("Instances")
    table.add_column("Description", style="dim", max_width=60)
    for m in loader.manifests:
        table.add_row(m.meta.name, str(len(m.instances)), m.meta.description or "")
    console.print(table)


@app.command()
def version():
    """Show version information."""
    from . import __version__

    console.print(f"hallcert version {__version__}")


if __name__ == "__main__":
    app()
