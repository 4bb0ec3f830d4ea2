import os
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from snlab.core.config import ExperimentConfig, quiet
from snlab.core.errors import SNLabError
from snlab.core.hlproc import GeneralizedVariable, Specialization, run_noninteracting, run_process
from snlab.core.padic import sn_product_chain
from snlab.core.rng import make_stream
from snlab.core.trajectory import Trajectory

console = Console(stderr=True)


class TrajectorySource(ABC):
    """Something that turns a random stream into a trajectory"""
    name = "abstract"

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg

    @abstractmethod
    def run(self, rng: np.random.Generator) -> Trajectory:
        pass

    def trial(self, index: int) -> Trajectory:
        """Trial `index` always draws from stream (seed, index)"""
        traj = self.run(make_stream(self.cfg.seed, index))
        traj.meta.update({"seed": self.cfg.seed, "trial": index})
        return traj

    def specialization(self) -> Specialization:
        """x = t, m = N - n per corner size, or a single (x, m) variable when --x is given"""
        t = self.cfg.t_value
        if self.cfg.x is not None:
            m = self.cfg.extras.get("m", 1)
            return Specialization(t, (GeneralizedVariable(self.cfg.x, m),))
        return Specialization.matrix(self.cfg.n, self.cfg.Ns, t)


class MatrixChainSource(TrajectorySource):
    """Singular numbers of products of Haar corners"""
    name = "matrix"

    def run(self, rng: np.random.Generator) -> Trajectory:
        cfg = self.cfg
        return sn_product_chain(cfg.n, cfg.Ns, cfg.p, cfg.k, cfg.precision, rng)


class ParticleSource(TrajectorySource):
    """Hall-Littlewood particle process"""
    name = "process"

    def run(self, rng: np.random.Generator) -> Trajectory:
        return run_process(self.cfg.n, self.specialization(), self.cfg.k, rng)


class NonInteractingSource(TrajectorySource):
    """Independent coordinates with the same impulses"""
    name = "noninteracting"

    def run(self, rng: np.random.Generator) -> Trajectory:
        return run_noninteracting(self.cfg.n, self.specialization(), self.cfg.k, rng)


class SourceManager:
    """Resolves source names, falling back to SNLAB_SOURCE and then the particle process"""

    def __init__(self):
        self.sources = {
            "matrix": MatrixChainSource,
            "process": ParticleSource,
            "noninteracting": NonInteractingSource,
        }
        self.valid_source_names = list(self.sources)

    def validate_source_name(self, name: str) -> bool:
        return name.lower() in self.sources

    def get_source(self, cfg: ExperimentConfig, name: Optional[str] = None) -> TrajectorySource:
        if name:
            name = name.lower()
            if not self.validate_source_name(name):
                raise SNLabError(
                    f"Unsupported source '{name}'. Valid options: {', '.join(self.valid_source_names)}",
                    "argument",
                    "cli",
                )
            return self.sources[name](cfg)

        env_default = os.getenv("SNLAB_SOURCE", "").lower()
        if env_default:
            if self.validate_source_name(env_default):
                return self.sources[env_default](cfg)
            console.print(f"[yellow]⚠️ Invalid SNLAB_SOURCE '{env_default}' in .env file. Valid options: {', '.join(self.valid_source_names)}[/yellow]")
        return ParticleSource(cfg)


# ---------------------------------------------------------------------------
# Trial runner

def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(bar_width=40),
        TimeElapsedColumn(),
        console=console,
        transient=True,
        disable=quiet(),
    )


def map_trials(fn: Callable[[Any], Any], jobs: Sequence[Any], workers: int = 1, description: str = "🎲 Running trials") -> List[Any]:
    """fn over jobs, results in job order whatever the worker count"""
    results: List[Any] = [None] * len(jobs)
    with _progress() as progress:
        task = progress.add_task(description, total=len(jobs))
        if workers <= 1 or len(jobs) <= 1:
            for i, job in enumerate(jobs):
                results[i] = fn(job)
                progress.update(task, advance=1)
            return results
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(jobs) // (workers * 8))
            for i, res in enumerate(pool.map(fn, jobs, chunksize=chunk)):
                results[i] = res
                progress.update(task, advance=1)
    return results


def _trial_job(job) -> Trajectory:
    name, cfg, index = job
    return SourceManager().get_source(cfg, name).trial(index)


def run_trials(
    cfg: ExperimentConfig,
    name: str,
    trials: Optional[int] = None,
    offset: int = 0,
    description: Optional[str] = None,
) -> List[Trajectory]:
    """Trials offset .. offset + trials - 1 of source `name`"""
    count = cfg.trials if trials is None else trials
    jobs = [(name, cfg, offset + i) for i in range(count)]
    return map_trials(_trial_job, jobs, cfg.workers, description or f"🎲 Sampling {name} trajectories")
