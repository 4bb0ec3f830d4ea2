from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

console = Console()


def _usage() -> Text:
    usage_text = Text()
    usage_text.append("USAGE:\n", style="bold yellow")
    usage_text.append("  snlab <command> [options]", style="green")
    return usage_text


def show_help():
    console.print("\n[bold cyan]🧮 snlab – p-adic singular numbers and Hall-Littlewood processes[/bold cyan]\n")
    console.print(_usage())
    console.print()

    commands_table = Table(show_header=False, box=None, padding=(0, 1))
    commands_table.add_column("Command", style="blue")
    commands_table.add_column("Description", style="white")

    commands_table.add_row("sample", "🎲 Sample matrix chains or particle processes")
    commands_table.add_row("compare", "📊 Compare samples against exact laws and limits")
    commands_table.add_row("predict", "🔮 Centers, scales and Lyapunov exponents")
    commands_table.add_row("verify", "✅ Run exact-arithmetic identity suites")
    commands_table.add_row("help", "📚 Show help message")
    commands_table.add_row("full-help", "📖 Show detailed help")

    console.print(Panel(commands_table, title="[bold]Commands[/bold]", border_style="blue", padding=(1, 2), title_align="left", expand=False))
    console.print()

    options_text = Text()
    options_text.append("OPTIONS:\n", style="bold yellow")
    options_text.append("  --p <prime>  --t <rational>  --n <int>  --N <list, e.g. 4,4,inf>\n", style="green")
    options_text.append("  --k <steps>  --trials <int>  --seed <u64>  --precision <auto | int>\n", style="green")
    options_text.append("  --tol-tv <float>  --tol-p <float>  --out <dir>  --format <csv | json>\n", style="green")
    options_text.append("\nSETUP (.env):\n", style="bold yellow")
    options_text.append("  SNLAB_SEED  SNLAB_OUT  SNLAB_WORKERS  SNLAB_TOL_TV  SNLAB_TOL_P  SNLAB_QUIET", style="green")
    console.print(Panel(options_text, title="[bold]Configuration[/bold]", border_style="blue", expand=False, padding=(1, 2), title_align="left"))
    console.print()

    console.print("\n[bold]For modes, suites and examples, run:[/bold] [green]snlab full-help[/green]\n")


def show_full_help():
    console.print("\n[bold cyan]🧮 snlab – p-adic singular numbers and Hall-Littlewood processes[/bold cyan]")
    console.print("Sample, compute exactly, compare.\n", style="dim")
    console.print(_usage())
    console.print()

    cmd_table = Table.grid(padding=(1, 7))
    cmd_table.add_column("Command", style="bold blue")
    cmd_table.add_column("Description", style="white")

    cmd_table.add_row("sample --kind matrix|process|noninteracting", "Write one trajectory per trial plus final-step frequencies")
    cmd_table.add_row("compare --mode <mode>", "Sample, compute the exact answer, test the fit")
    cmd_table.add_row("predict", "Write prediction.json (centers, scales, Lyapunov table)")
    cmd_table.add_row("verify --suite <suite>", "Exact identities; nonzero exit names a counterexample")

    console.print(Panel(cmd_table, title="Commands", padding=(1, 2), title_align="left", expand=False))
    console.print()

    modes_text = Text()
    modes_text.append("compare modes:\n", style="bold")
    modes_text.append("  corners  ginibre  atom  product  kernel  process-vs-matrix\n", style="green")
    modes_text.append("  lln  clt  lyapunov  friedman-washington\n", style="green")
    modes_text.append("\nverify suites:\n", style="bold")
    modes_text.append("  identities  factorization  kernel  convergence\n", style="green")
    modes_text.append("\nexit codes:\n", style="bold")
    modes_text.append("  0 pass, 1 threshold failure, 2 usage error, 3 resource error\n", style="green")

    console.print(Panel(modes_text, title="Modes & Suites", border_style="blue", title_align="left", padding=(1, 2), expand=False))
    console.print()

    ex_text = Text()
    ex_text.append("  snlab sample --kind process --n 1 --x 1/2 --t 1/2 --k 10 --seed 7\n", style="green")
    ex_text.append("  snlab compare --mode corners --p 2 --n 2 --N 4 --trials 10000 --precision 16\n", style="green")
    ex_text.append("  snlab compare --mode product --n 2 --lam 1,0 --mu 1,0 --trials 10000\n", style="green")
    ex_text.append("  snlab predict --p 2 --n 6 --N inf --k 100\n", style="green")
    ex_text.append("  snlab verify --suite factorization --dmax 12\n", style="green")

    console.print(Panel(ex_text, title="Examples", title_align="left", border_style="blue", padding=(1, 5), expand=False))
