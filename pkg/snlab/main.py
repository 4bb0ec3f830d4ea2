import json
from pathlib import Path
from typing import Callable, Dict, Optional

import typer
from rich.console import Console
from typer.core import TyperGroup

from snlab.core import cli_help
from snlab.core.config import ExperimentConfig, default_out, env_float, env_int, parse_ns, parse_precision, parse_rational, parse_signature
from snlab.core.errors import SNLabError
from snlab.core.harness import ExperimentResult, run_compare, run_predict, run_verify
from snlab.core.sources import SourceManager, run_trials
from snlab.core.stats import EmpiricalDist, show_reports
from snlab.core.storage import init_out, write_distribution, write_frequencies, write_manifest, write_report, write_trajectories


class CustomGroup(TyperGroup):
    def get_command(self, ctx, cmd_name):
        cmd = super().get_command(ctx, cmd_name)
        if cmd is None:
            console.print(f"[red]Unknown command: '{cmd_name}'[/red]")
            cli_help.show_help()
            ctx.exit(2)
        return cmd


app = typer.Typer(
    cls=CustomGroup,
    help="🧮 snlab - p-adic singular numbers and Hall-Littlewood processes",
    rich_markup_mode="rich",
    invoke_without_command=True,
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)


@app.callback()
def main(ctx: typer.Context):
    if ctx.invoked_subcommand is None:
        cli_help.show_help()
        raise typer.Exit()


def _build_config(command: str, **opts) -> ExperimentConfig:
    extras = {k: v for k, v in opts.pop("extras", {}).items() if v is not None}
    cfg = ExperimentConfig(
        command=command,
        p=opts["p"],
        t=parse_rational(opts["t"]) if opts.get("t") else None,
        x=parse_rational(opts["x"]) if opts.get("x") else None,
        n=opts["n"],
        Ns=parse_ns(opts["N"]),
        k=opts["k"],
        trials=opts["trials"],
        seed=opts["seed"] if opts["seed"] is not None else env_int("SNLAB_SEED", 0),
        precision=parse_precision(opts["precision"]),
        tol_tv=opts["tol_tv"] if opts["tol_tv"] is not None else env_float("SNLAB_TOL_TV", 0.02),
        tol_p=opts["tol_p"] if opts["tol_p"] is not None else env_float("SNLAB_TOL_P", 0.001),
        out=Path(opts["out"]) if opts.get("out") else default_out(),
        format=opts["format"],
        workers=opts["workers"] if opts["workers"] is not None else env_int("SNLAB_WORKERS", 1),
        extras=extras,
    )
    return cfg.validate()


def _guarded(action: Callable[[], int]):
    """Run a command body and map SNLabError to the documented exit codes"""
    try:
        code = action()
    except SNLabError as e:
        err_console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(code=e.exit_code)
    if code:
        raise typer.Exit(code=code)


def _finish(cfg: ExperimentConfig, result: ExperimentResult) -> int:
    out = init_out(cfg.out)
    digest = cfg.config_hash()
    files = write_report(out, result.reports, cfg, result.title, result.details)
    for name, law in result.laws.items():
        files.append(write_distribution(out / name, law, digest))
    for name, emp in result.samples.items():
        files.append(write_frequencies(out / name, emp, digest))
    write_manifest(out, cfg, files)
    show_reports(result.reports, f"📊 {result.title}")
    if result.passed:
        console.print(f"✅ All checks passed. Report: [green]{out / 'report.json'}[/green]")
        return 0
    err_console.print(f"[red]❌ Threshold failure. Report: {out / 'report.json'}[/red]")
    return 1


# shared options
P = typer.Option(2, "--p", help="Prime p")
T = typer.Option(None, "--t", help="t as a rational (defaults to 1/p)")
X = typer.Option(None, "--x", help="Specialization value x for the particle process")
NPART = typer.Option(2, "--n", help="Particles / corner rows")
NS = typer.Option("inf", "--N", help="Corner sizes, comma separated, 'inf' allowed")
K = typer.Option(1, "--k", help="Number of steps")
TRIALS = typer.Option(1, "--trials", help="Independent trials")
SEED = typer.Option(None, "--seed", help="64-bit seed (SNLAB_SEED)")
PRECISION = typer.Option("auto", "--precision", help="p-adic precision D or 'auto'")
TOL_TV = typer.Option(None, "--tol-tv", help="TV threshold (SNLAB_TOL_TV)")
TOL_P = typer.Option(None, "--tol-p", help="p-value threshold (SNLAB_TOL_P)")
OUT = typer.Option(None, "--out", help="Output directory (SNLAB_OUT)")
FORMAT = typer.Option("csv", "--format", help="csv | json")
WORKERS = typer.Option(None, "--workers", help="Worker processes (SNLAB_WORKERS)")


@app.command("sample")
def sample(
    kind: str = typer.Option("process", "--kind", help="matrix | process | noninteracting"),
    m: Optional[str] = typer.Option(None, "--m", help="Length of the generalized variable given by --x ('inf' allowed)"),
    p: int = P, t: Optional[str] = T, x: Optional[str] = X, n: int = NPART, N: str = NS, k: int = K,
    trials: int = TRIALS, seed: Optional[int] = SEED, precision: str = PRECISION,
    tol_tv: Optional[float] = TOL_TV, tol_p: Optional[float] = TOL_P, out: Optional[str] = OUT,
    format: str = FORMAT, workers: Optional[int] = WORKERS,
):
    """🎲 Sample matrix chains or particle processes"""
    def body() -> int:
        extras = {"kind": kind, "m": parse_ns(m)[0] if m else None}
        cfg = _build_config("sample", **locals_of(p, t, x, n, N, k, trials, seed, precision, tol_tv, tol_p, out, format, workers), extras=extras)
        if cfg.k < 1:
            raise SNLabError("sample needs --k >= 1", "argument", "cli")
        SourceManager().get_source(cfg, kind)
        trajs = run_trials(cfg, kind)
        out_dir = init_out(cfg.out)
        files = write_trajectories(out_dir, trajs, cfg)
        finals = EmpiricalDist.from_samples("censored" if tr.meta.get("censored") else tr.final for tr in trajs)
        files.append(write_frequencies(out_dir / "frequencies.json", finals, cfg.config_hash()))
        write_manifest(out_dir, cfg, files)
        console.print(f"✅ Wrote {len(trajs)} {kind} trajectories to [green]{out_dir}[/green]")
        return 0

    _guarded(body)


@app.command("compare")
def compare(
    mode: str = typer.Option("corners", "--mode", help="corners | ginibre | atom | product | kernel | process-vs-matrix | lln | clt | lyapunov | friedman-washington"),
    lam: Optional[str] = typer.Option(None, "--lam", help="Signature, e.g. 1,0"),
    mu: Optional[str] = typer.Option(None, "--mu", help="Signature, e.g. 1,0"),
    m: Optional[int] = typer.Option(None, "--m", help="Corner columns (defaults to n)"),
    source: Optional[str] = typer.Option(None, "--source", help="Trajectory source for lln/clt/lyapunov"),
    p: int = P, t: Optional[str] = T, x: Optional[str] = X, n: int = NPART, N: str = NS, k: int = K,
    trials: int = TRIALS, seed: Optional[int] = SEED, precision: str = PRECISION,
    tol_tv: Optional[float] = TOL_TV, tol_p: Optional[float] = TOL_P, out: Optional[str] = OUT,
    format: str = FORMAT, workers: Optional[int] = WORKERS,
):
    """📊 Compare samples against exact laws and limits"""
    def body() -> int:
        extras = {
            "lam": parse_signature(lam) if lam else None,
            "mu": parse_signature(mu) if mu else None,
            "cols": m,
            "source": source,
        }
        cfg = _build_config(f"compare:{mode}", **locals_of(p, t, x, n, N, k, trials, seed, precision, tol_tv, tol_p, out, format, workers), extras=extras)
        return _finish(cfg, run_compare(mode, cfg))

    _guarded(body)


@app.command("predict")
def predict(
    p: int = P, t: Optional[str] = T, x: Optional[str] = X, n: int = NPART, N: str = NS, k: int = K,
    trials: int = TRIALS, seed: Optional[int] = SEED, precision: str = PRECISION,
    tol_tv: Optional[float] = TOL_TV, tol_p: Optional[float] = TOL_P, out: Optional[str] = OUT,
    format: str = FORMAT, workers: Optional[int] = WORKERS,
):
    """🔮 Centers, scales and Lyapunov exponents"""
    def body() -> int:
        cfg = _build_config("predict", **locals_of(p, t, x, n, N, k, trials, seed, precision, tol_tv, tol_p, out, format, workers))
        prediction, result = run_predict(cfg)
        out_dir = init_out(cfg.out)
        prediction["config_hash"] = cfg.config_hash()
        path = out_dir / "prediction.json"
        path.write_text(json.dumps(prediction, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        write_manifest(out_dir, cfg, [path])
        show_reports(result.reports, f"🔮 {result.title}")
        console.print(f"✅ Prediction written to [green]{path}[/green]")
        return 0 if result.passed else 1

    _guarded(body)


@app.command("verify")
def verify(
    suite: str = typer.Option("identities", "--suite", help="identities | factorization | kernel | convergence"),
    dmax: Optional[int] = typer.Option(None, "--dmax", help="Largest D for the factorization suite"),
    q: Optional[str] = typer.Option(None, "--q", help="q for the factorization suite"),
    p: int = P, t: Optional[str] = T, x: Optional[str] = X, n: int = NPART, N: str = NS, k: int = K,
    trials: int = TRIALS, seed: Optional[int] = SEED, precision: str = PRECISION,
    tol_tv: Optional[float] = TOL_TV, tol_p: Optional[float] = TOL_P, out: Optional[str] = OUT,
    format: str = FORMAT, workers: Optional[int] = WORKERS,
):
    """✅ Run exact-arithmetic identity suites"""
    def body() -> int:
        extras = {"dmax": dmax, "q": parse_rational(q) if q else None}
        cfg = _build_config(f"verify:{suite}", **locals_of(p, t, x, n, N, k, trials, seed, precision, tol_tv, tol_p, out, format, workers), extras=extras)
        return _finish(cfg, run_verify(suite, cfg))

    _guarded(body)


def locals_of(p, t, x, n, N, k, trials, seed, precision, tol_tv, tol_p, out, format, workers) -> Dict[str, object]:
    return {
        "p": p, "t": t, "x": x, "n": n, "N": N, "k": k, "trials": trials, "seed": seed,
        "precision": precision, "tol_tv": tol_tv, "tol_p": tol_p, "out": out, "format": format, "workers": workers,
    }


@app.command("help", hidden=True)
def show_short_help():
    """📚 Show help information"""
    cli_help.show_help()


@app.command("full-help", hidden=True)
def show_detailed_help():
    """📘 Show extended help information"""
    cli_help.show_full_help()


if __name__ == "__main__":
    app()
