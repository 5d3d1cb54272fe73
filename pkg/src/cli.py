#!/usr/bin/env python3
"""
Curb CLI - entity-network simulations with self-modifying update rules
"""
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from .codedata import ExecutionMode
from .data import elementary_rule_source, life_like_rule_source
from .config_models import SystemSpec
from .errors import CurbError, UsageError
from .harness import adapt_only, concretize_spec, replay_record, run_system
from .metamodel.lineage import source_hash
from .metamodel.states import StateDomain
from .metamodel.system import actualize
from .rule_language import RuleSource, compile_source, render
from .utils import (
    first_difference, generation_record, lineage_entries, load_config, load_generation_record,
    record_roots, save_generation_record, write_lineage, write_trace
)

console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=debug, rich_tracebacks=debug)],
        force=True,
    )


def _fail(ctx: click.Context, error: Exception) -> None:
    """Report an error and exit with its family's code"""
    if isinstance(error, CurbError):
        console.print(f"[red]Error ({type(error).__name__}): {error}[/red]")
        code = error.exit_code
    else:
        console.print(f"[red]Error: {error}[/red]")
        code = 1
    if ctx.obj.get('debug'):
        import traceback
        console.print(f"[dim]{traceback.format_exc()}[/dim]")
    sys.exit(code)


def _domain_option(value: Optional[str]) -> Optional[StateDomain]:
    if value is None:
        return None
    try:
        return StateDomain.parse(value)
    except (ValueError, CurbError) as e:
        raise click.BadParameter(str(e))


def _with_overrides(
    spec: SystemSpec,
    mode: Optional[str],
    iterations: Optional[int],
    workers: Optional[int]
) -> SystemSpec:
    """Apply command-line overrides to a loaded configuration"""
    update = {}
    if mode is not None:
        update['mode'] = ExecutionMode(mode)
    if iterations is not None:
        if iterations < 0:
            raise UsageError(f"--iterations must be >= 0, got {iterations}")
        update['iterations'] = iterations
    if workers is not None:
        if workers < 1:
            raise UsageError(f"--workers must be >= 1, got {workers}")
        update['workers'] = workers
    return spec.model_copy(update=update) if update else spec


def _write_rules(source: RuleSource, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(source.text + "\n", encoding='utf-8')
        console.print(f"[green]✓ Rules written to {output}[/green]")
    else:
        click.echo(source.text)


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log regime transitions and run summaries')
@click.option('--debug', is_flag=True, help='Log every step and show tracebacks')
@click.pass_context
def cli(ctx, verbose, debug):
    """Curb - simulate entity networks whose update rules adapt themselves"""
    ctx.ensure_object(dict)
    ctx.obj['debug'] = debug
    _configure_logging(verbose, debug)


@cli.command()
@click.argument('config', type=click.Path())
@click.option('--mode', type=click.Choice([m.value for m in ExecutionMode]), help='Override the configured mode')
@click.option('--iterations', '-t', type=int, help='Override the configured iteration count')
@click.option('--workers', type=int, help='Override the configured worker threads')
@click.pass_context
def run(ctx, config, mode, iterations, workers):
    """Run a configured system and write its trace (and lineage)"""
    try:
        spec = _with_overrides(load_config(config), mode, iterations, workers)

        with console.status("[bold green]Running system..."):
            result = run_system(spec)

        write_trace(result.rows, spec.output.trace)
        if spec.adaptation.schedule is not None:
            write_lineage(result.adaptations, spec.output.lineage)
            save_generation_record(
                spec.output.record,
                generation_record(result.adaptations, spec.rule_sources, spec.seed)
            )
    except Exception as e:
        _fail(ctx, e)
        return

    table = Table(title=f"Run: {Path(config).name}")
    table.add_column("Item", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Entities", str(spec.entities))
    table.add_row("Iterations", str(result.iterations))
    table.add_row("Mode", spec.mode.value)
    table.add_row("Adaptations", str(len(result.adaptations)))
    table.add_row("Trace", str(spec.output.trace))
    if spec.adaptation.schedule is not None:
        table.add_row("Lineage", str(spec.output.lineage))
    console.print(table)


@cli.command()
@click.argument('rulefile', type=click.Path())
@click.option('--domain', 'domain_text', required=True, help="State domain: 'bool' or 'int <lo> <hi>'")
@click.option('--milieu', type=int, required=True, help='Milieu length of the entities using the rules')
@click.option('--render', 'show_render', is_flag=True, help='Print the canonical rendering')
@click.pass_context
def validate(ctx, rulefile, domain_text, milieu, show_render):
    """Check a rule file against a state domain and milieu size"""
    domain = _domain_option(domain_text)
    try:
        path = Path(rulefile)
        if not path.exists():
            raise click.FileError(rulefile, hint="rule file not found")
        source = RuleSource(path.read_text(encoding='utf-8'), name=path.name)
        program = compile_source(source, domain, milieu)
    except click.FileError:
        raise
    except Exception as e:
        _fail(ctx, e)
        return

    console.print(f"[green]✓ {path.name} is valid for {domain} with milieuCount {milieu}[/green]")
    console.print(f"[dim]{program.node_count} nodes, hash {source_hash(source)}[/dim]")
    if show_render:
        console.print(Panel(render(program.ast).text, title="Canonical form", border_style="green"))


@cli.command()
@click.argument('config', type=click.Path())
@click.option('--events', '-m', type=int, default=1, show_default=True, help='Number of adaptations')
@click.option('--output', '-o', type=click.Path(), help='Child rule file (default: beside the lineage file)')
@click.pass_context
def adapt(ctx, config, events, output):
    """Adapt a configured system's rules without running it"""
    try:
        spec = load_config(config)
        system = adapt_only(spec, events)
        entries = list(system.lineage.entries)

        lineage = spec.output.lineage
        write_lineage(entries, lineage)
        save_generation_record(spec.output.record, generation_record(entries, spec.rule_sources, spec.seed))

        written = []
        for slot, (before, after) in enumerate(zip(spec.rule_sources, system.rule_sources)):
            if before == after:
                continue
            if output and system.shared:
                target = Path(output)
            else:
                suffix = "child" if system.shared else f"child.{slot}"
                target = lineage.with_name(f"{Path(before.name or 'rules').stem}.{suffix}.curb")
            target.write_text(after.text + "\n", encoding='utf-8')
            written.append(target)
    except Exception as e:
        _fail(ctx, e)
        return

    table = Table(title=f"Adaptation lineage ({len(entries)} records)")
    table.add_column("Gen", style="cyan")
    table.add_column("Operator", style="magenta")
    table.add_column("Entity")
    table.add_column("Parent", style="dim")
    table.add_column("Child", style="green")
    for entry in entries:
        table.add_row(
            str(entry.generation), entry.operator,
            "shared" if entry.entity is None else str(entry.entity),
            entry.parent_hash, entry.child_hash
        )
    console.print(table)
    for target in written:
        console.print(f"[green]✓ Child rules written to {target}[/green]")
    console.print(f"[dim]Lineage: {lineage}[/dim]")


@cli.command('trace-diff')
@click.argument('a', type=click.Path())
@click.argument('b', type=click.Path())
@click.pass_context
def trace_diff(ctx, a, b):
    """Print the first differing line of two traces, or 'identical'"""
    try:
        difference = first_difference(Path(a), Path(b))
    except Exception as e:
        _fail(ctx, e)
        return

    if difference is None:
        click.echo("identical")
        return
    line, left, right = difference
    click.echo(f"line {line}:")
    click.echo(f"< {left}")
    click.echo(f"> {right}")
    sys.exit(1)


@cli.command()
@click.argument('number', type=int)
@click.option('--domain', 'domain_text', default='int 0 1', show_default=True, help="'bool' or 'int <lo> <hi>'")
@click.option('--output', '-o', type=click.Path(), help='Write the rules to a file instead of stdout')
@click.pass_context
def elementary(ctx, number, domain_text, output):
    """Generate the rules of an elementary cellular automaton (0-255)"""
    domain = _domain_option(domain_text)
    try:
        source = elementary_rule_source(number, domain)
        _write_rules(source, output)
    except Exception as e:
        _fail(ctx, e)


@cli.command()
@click.argument('rulestring', default='B3/S23')
@click.option('--domain', 'domain_text', default='int 0 1', show_default=True, help="'bool' or 'int <lo> <hi>'")
@click.option('--output', '-o', type=click.Path(), help='Write the rules to a file instead of stdout')
@click.pass_context
def life(ctx, rulestring, domain_text, output):
    """Generate the rules of a life-like automaton, e.g. B3/S23"""
    domain = _domain_option(domain_text)
    try:
        source = life_like_rule_source(rulestring, domain)
        _write_rules(source, output)
    except Exception as e:
        _fail(ctx, e)


@cli.command('replay')
@click.argument('paths', nargs=-1, required=True, type=click.Path())
@click.pass_context
def replay_command(ctx, paths):
    """
    Re-apply a generation record and check every hash.

    PATHS is [RULEFILE] RECORD. Without RULEFILE the roots stored in the record
    are used, one per entity for per-entity systems.
    """
    record = paths[-1]
    try:
        if len(paths) > 2:
            raise UsageError(f"expected [RULEFILE] RECORD, got {len(paths)} paths")
        data = load_generation_record(Path(record))
        if len(paths) == 2:
            path = Path(paths[0])
            roots = [RuleSource(path.read_text(encoding='utf-8'), name=path.name)]
        else:
            roots = record_roots(data)
        outcomes = replay_record(lineage_entries(data), roots)
    except Exception as e:
        _fail(ctx, e)
        return

    table = Table(title=f"Replay of {Path(record).name}")
    table.add_column("Gen", style="cyan")
    table.add_column("Operator", style="magenta")
    table.add_column("Parent", style="dim")
    table.add_column("Child")
    for outcome in outcomes:
        table.add_row(
            str(outcome.entry.generation),
            outcome.entry.operator,
            "✓" if outcome.parent_matches else "✗",
            "[green]✓[/green]" if outcome.child_matches else "[red]✗[/red]",
        )
    console.print(table)

    if not all(o.reproduced for o in outcomes):
        console.print("[red]Replay diverged from the record[/red]")
        sys.exit(1)
    console.print(f"[green]✓ All {len(outcomes)} generation(s) reproduced[/green]")


@cli.command()
@click.argument('config', type=click.Path())
@click.pass_context
def describe(ctx, config):
    """Show a configuration's regime pipeline without running it"""
    try:
        spec = load_config(config)
        metastable = concretize_spec(spec)
        actual = actualize(metastable)
    except Exception as e:
        _fail(ctx, e)
        return

    virtual = metastable.virtual
    console.print(Panel(
        f"State kind: {virtual.domain_kind.value}\nConcepts: {', '.join(virtual.concepts)}",
        title="Virtual", border_style="blue"
    ))

    params = Table(title="Metastable")
    params.add_column("Parameter", style="cyan")
    params.add_column("Value", style="green")
    params.add_row("Entities", str(metastable.entity_count))
    params.add_row("State domain", str(metastable.state_domain))
    params.add_row("Topology", metastable.topology.describe())
    params.add_row("Rules", "shared" if metastable.shared else "per entity")
    params.add_row("Seed", str(metastable.rng_seed))
    params.add_row("Iterations", str(spec.iterations))
    params.add_row("Mode", spec.mode.value)
    schedule = spec.adaptation.schedule
    params.add_row("Schedule", f"every {schedule.every} for {schedule.events}" if schedule else "none")
    console.print(params)

    rules = Table(title="Actual (compiled rules)")
    rules.add_column("Slot", style="cyan")
    rules.add_column("Source")
    rules.add_column("Milieu", justify="right")
    rules.add_column("Nodes", justify="right")
    rules.add_column("Hash", style="dim")
    for slot, program in enumerate(actual.programs):
        source = metastable.rule_sources[slot]
        rules.add_row(
            "shared" if metastable.shared else str(slot),
            source.name or "-", str(program.milieu_count), str(program.node_count), source_hash(source)
        )
    console.print(rules)


if __name__ == '__main__':
    cli(obj={})
