from typing import Any, Dict, List

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .involution import Census

# Reports go to stdout as JSON or CSV; everything rendered here goes to stderr.
console = Console(stderr=True)

COMMANDS = (
    ("census", "Fixed components of the involution for a weight vector."),
    ("stability", "Check alpha-stability of a hyperpolygon configuration."),
    ("normalize", "Move a point of the complex level set onto the real one."),
    ("classify", "Decide whether a level-set point is fixed and find its component."),
    ("convert", "Map to Higgs data, a Minkowski polygon, or back to a hyperpolygon."),
    ("bend", "Bending flow of a Minkowski polygon, optionally as a CSV sweep."),
    ("witness", "Closed Minkowski polygons with unbounded diagonal."),
    ("sample", "A random point of the complex level set."),
    ("selftest", "Run the invariant suite."),
)


def display_census(census: Census) -> None:
    """Displays the components of a census."""
    table = Table(title=f"Fixed components, n = {census.n}", show_header=True, header_style="bold magenta")
    table.add_column("Component", style="cyan")
    table.add_column("Real dim", justify="right")
    table.add_column("Compact")
    table.add_column("Poincaré")
    table.add_column("min phi", justify="right")

    for component in census.components:
        poincare = "?" if component.poincare is None else _poincare_text(component.poincare)
        floor = "" if component.phi_floor is None else f"{component.phi_floor:.6g}"
        table.add_row(
            component.label,
            str(component.dimension),
            "[green]yes" if component.compact else "no",
            poincare,
            floor,
        )

    console.print(table)
    console.print(
        f"[bold]{census.compact}[/bold] compact, [bold]{census.noncompact}[/bold] non-compact, "
        f"{census.short_sets} short sets"
    )
    for note in census.notes:
        console.print(f"[dim]{note}[/dim]")


def _poincare_text(coefficients: List[int]) -> str:
    terms = []
    for degree, c in enumerate(coefficients):
        if not c:
            continue
        power = "" if degree == 0 else f"t^{degree}"
        terms.append(f"{c}{power}" if c != 1 or not power else power)
    return " + ".join(terms)


def display_report(title: str, report: Dict[str, Any], success: bool = True) -> None:
    lines = [f"[bold]{key}:[/bold] {value}" for key, value in report.items() if not isinstance(value, (list, dict))]
    console.print(Panel(
        "\n".join(lines) or "No scalar fields",
        title=f"[green]✓ {title}" if success else f"[red]✗ {title}",
        border_style="green" if success else "red",
    ))


def display_error(payload: Dict[str, Any]) -> None:
    console.print(Panel(
        payload.get("message", "Unknown error"),
        title=f"[red]{payload.get('error', 'Error')}",
        border_style="red",
    ))


def display_check_results(results: List[Dict[str, Any]]) -> None:
    """Displays selftest results, one row per check."""
    table = Table(title="Invariant checks")
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Details", style="dim")

    for result in results:
        details = result.get("details", {})
        summary = details.get("message") if not result["success"] else ", ".join(sorted(details))
        table.add_row(result["check"], "[green]✓" if result["success"] else "[red]✗", str(summary or ""))

    console.print(table)
    passed = sum(1 for r in results if r["success"])
    style = "green" if passed == len(results) else "red"
    console.print(f"[{style}]{passed}/{len(results)} checks passed[/{style}]")


def display_history(history: List[Dict[str, Any]]) -> None:
    """Display recorded runs."""
    if not history:
        console.print("[yellow]No run history found.[/yellow]")
        return

    table = Table(title=f"Run History (Last {len(history)} Runs)")
    table.add_column("Time", style="cyan")
    table.add_column("Command", style="green")
    table.add_column("Exit", style="magenta")

    for entry in history:
        datetime_str = entry.get("datetime", "Unknown")
        if isinstance(datetime_str, str) and len(datetime_str) > 19:
            datetime_str = datetime_str[:19].replace("T", " ")
        code = entry.get("exit_code")
        table.add_row(datetime_str, entry.get("command", "Unknown"), "[green]0" if code == 0 else f"[red]{code}")

    console.print(table)


def display_home_page(console: Console = console):
    """Displays the command overview shown when no command is given."""
    console.print(Panel(
        Text("minkpoly - hyperpolygons, Minkowski polygons and their fixed points", justify="center"),
        title="minkpoly",
        border_style="blue"
    ))

    table = Table.grid(padding=(1, 2))
    table.add_column(style="cyan", justify="right")
    table.add_column(style="white")
    table.add_column(style="green")
    for name, description in COMMANDS:
        table.add_row(name, "[dim]→[/dim]", description)

    console.print("\n[bold]Available Commands:[/bold]")
    console.print(table)

    console.print("\n[bold]Example Usage:[/bold]")
    console.print("  minkpoly census --input weights.json")
    console.print("  minkpoly normalize --input point.json --output normalized.json")
    console.print("  minkpoly bend --input quad.json --sweep 64 --format csv")
