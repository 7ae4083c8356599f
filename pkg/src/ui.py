"""
Terminal UI Components using Rich library

Status lines, section headers and the report tables of every subcommand.
When stdout carries a JSON document, status output moves to stderr.
"""

from typing import Iterable, Optional, Sequence

import numpy as np
from rich.box import DOUBLE, ROUNDED
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

console = Console()
err_console = Console(stderr=True)

_status = {"console": console}


def route_status_to_stderr(enabled: bool = True):
    _status["console"] = err_console if enabled else console


def status_console() -> Console:
    return _status["console"]


def print_success(message: str):
    status_console().print(f"[green]✓[/green] {message}")


def print_error(message: str):
    err_console.print(f"[red]✗[/red] [red]{escape(message)}[/red]")


def print_warning(message: str):
    status_console().print(f"[yellow]⚠[/yellow] [yellow]{escape(message)}[/yellow]")


def print_info(message: str):
    status_console().print(f"[cyan]→[/cyan] {message}")


def print_section_header(title: str):
    console.print()
    console.print(Panel(title, style="cyan", box=ROUNDED))
    console.print()


def print_residual(name: str, value: float, limit: float):
    if value <= limit:
        print_success(f"{name}: {value:.3e} (limit {limit:.1e})")
    else:
        print_warning(f"{name}: {value:.3e} exceeds {limit:.1e}")


def _fmt(z, digits: int) -> str:
    z = complex(z)
    if abs(z.imag) < 10 ** -(digits + 2):
        return f"{z.real:.{digits}f}"
    return f"{z.real:.{digits}f}{z.imag:+.{digits}f}i"


def matrix_table(matrix: np.ndarray, title: Optional[str] = None, digits: int = 6,
                 row_labels: Optional[Sequence[str]] = None, col_labels: Optional[Sequence[str]] = None) -> Table:
    matrix = np.atleast_2d(matrix)
    table = Table(title=title, box=ROUNDED, border_style="cyan", show_header=col_labels is not None)
    if row_labels is not None:
        table.add_column("", style="dim")
    for j in range(matrix.shape[1]):
        table.add_column(col_labels[j] if col_labels else "", justify="right")
    for i, row in enumerate(matrix):
        cells = [_fmt(z, digits) for z in row]
        if row_labels is not None:
            cells.insert(0, row_labels[i])
        table.add_row(*cells)
    return table


def print_spin_matrices(sm, residual: float):
    print_section_header(f"SPIN MATRICES  S = {sm.s.label()}  (m = {sm.s.m})")
    labels = [f"{x:+g}" for x in sm.s.m_values]
    for name, op in zip(("S_x", "S_y", "S_z"), sm.components):
        console.print(matrix_table(op, name, 4, labels, labels))
    print_info(f"commutator residual max|[S_u,S_v] - i eps S_w| = {residual:.3e}")


def print_g_tensor(g: np.ndarray, title: str = "g-tensor", span_residual: Optional[float] = None):
    console.print(matrix_table(g, title, 6, ["x", "y", "z"], ["1", "2", "3"]))
    if span_residual is not None:
        print_info(f"residual outside span{{S_v}}: {span_residual:.3e}")


def print_decomposition(pd):
    table = Table(box=DOUBLE, show_header=False, border_style="cyan")
    table.add_column("Field", style="dim")
    table.add_column("Value", style="green bold")
    table.add_row("g-values", "  ".join(f"{x:+.8f}" for x in pd.g_values))
    table.add_row("det sign", "+" if pd.det_sign > 0 else "-")
    table.add_row("singular", "yes" if pd.singular else "no")
    table.add_row("diagonal residual", f"{pd.g_diag_residual:.3e}")
    console.print(Panel(table, title="[bold cyan]PRINCIPAL AXES[/bold cyan]", border_style="cyan", box=DOUBLE))
    console.print(matrix_table(pd.o_r, "O_r (real space)", 8))
    console.print(matrix_table(pd.o_f, "O_f (fictitious spin)", 8))


def print_splittings(levels: np.ndarray, m_values: Iterable[float], field: np.ndarray,
                     g_eff: Optional[float] = None):
    table = Table(title=f"Zeeman levels, B = ({field[0]:g}, {field[1]:g}, {field[2]:g}) a.u.",
                  box=ROUNDED, border_style="cyan")
    table.add_column("M", style="cyan", justify="right")
    table.add_column("E / Hartree", style="green", justify="right")
    for mk, e in zip(m_values, levels):
        table.add_row(f"{mk:+g}", f"{e:+.12e}")
    console.print(table)
    if g_eff is not None:
        print_info(f"effective g along the field: {g_eff:.8f}")


def print_alt_result(res):
    table = Table(box=ROUNDED, show_header=False, border_style="cyan")
    table.add_column("Field", style="dim")
    table.add_column("Value", style="bold")
    table.add_row("g-values", "  ".join(f"{x:+.8f}" for x in res.g_values))
    table.add_row("det sign", "+" if res.det_sign > 0 else "-")
    if res.eta is not None:
        table.add_row("eta", f"{res.eta:+.10f}  (residual {res.eta_residual:.2e})")
    if len(res.alphas):
        table.add_row("alpha_k", "  ".join(f"{a:+.6f}" for a in res.alphas))
    table.add_row("diagonal residual", f"{res.residual:.3e}")
    table.add_row("irrep residual", f"{res.irrep_residual:.3e}")
    if res.fallback:
        table.add_row("path", "[yellow]zero-row fallback[/yellow]")
    console.print(Panel(table, title="[bold cyan]ALTERNATIVE DIAGONALIZATION[/bold cyan]",
                        border_style="cyan", box=ROUNDED))


def print_theorem_report(report):
    table = Table(title="Time-reversal theorem residuals", box=ROUNDED, border_style="cyan")
    table.add_column("Check", style="cyan")
    table.add_column("Max residual", justify="right")
    for name, value in report.residuals().items():
        table.add_row(name.replace("_", " "), f"{value:.3e}")
    console.print(table)


def print_cross_validation(rows: Sequence[dict], max_deviation: float):
    table = Table(title="Principal axes vs alternative diagonalization", box=ROUNDED, border_style="cyan")
    table.add_column("#", style="dim", justify="right")
    table.add_column("|g| principal", justify="right")
    table.add_column("|g| alternative", justify="right")
    table.add_column("det", justify="center")
    table.add_column("deviation", justify="right")
    for i, row in enumerate(rows, 1):
        table.add_row(
            str(i),
            " ".join(f"{abs(x):.6f}" for x in row["principal"]),
            " ".join(f"{abs(x):.6f}" for x in row["alternative"]),
            "+" if row["det_sign"] > 0 else "-",
            f"{row['deviation']:.2e}",
        )
    console.print(table)
    print_info(f"max deviation {max_deviation:.3e}")


def create_progress_bar(description: str) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=err_console,
        transient=True,
    )
