import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from snlab.core.config import ExperimentConfig
from snlab.core.errors import SNLabError
from snlab.core.stats import EmpiricalDist, GofReport, render_markdown
from snlab.core.trajectory import Trajectory


def init_out(out: Path) -> Path:
    """Create the output directory"""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise SNLabError(f"cannot create output directory {out}: {e}", "resource", "storage")
    return out


def _dump_json(path: Path, payload: Any) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_trajectory_csv(path: Path, traj: Trajectory, config_hash: str) -> Path:
    """`k,lambda_1,...,lambda_n` with one row per step, k = 0 included"""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash: {config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(traj.header())
        writer.writerows(traj.rows())
    return path


def write_trajectories(out: Path, trajs: Sequence[Trajectory], cfg: ExperimentConfig) -> List[Path]:
    digest = cfg.config_hash()
    if cfg.format == "json":
        payload = {"config_hash": digest, "trajectories": [t.to_json() for t in trajs]}
        return [_dump_json(out / "trajectories.json", payload)]
    paths = []
    for traj in trajs:
        index = traj.meta.get("trial", len(paths))
        paths.append(write_trajectory_csv(out / f"trajectory_{index:05d}.csv", traj, digest))
    return paths


def write_distribution(path: Path, law: Mapping, config_hash: str) -> Path:
    """Exact law as [{signature, prob_num, prob_den}] with its tail mass"""
    tail = getattr(law, "tail", 0)
    payload = {
        "config_hash": config_hash,
        "distribution": law.to_json(),
        "tail": str(tail),
    }
    return _dump_json(path, payload)


def write_frequencies(path: Path, emp: EmpiricalDist, config_hash: str) -> Path:
    return _dump_json(path, {"config_hash": config_hash, "total": emp.total, "counts": emp.to_json()})


def write_report(
    out: Path,
    reports: Sequence[GofReport],
    cfg: ExperimentConfig,
    title: str,
    extra: Optional[Dict[str, Any]] = None,
) -> List[Path]:
    digest = cfg.config_hash()
    payload = {
        "config_hash": digest,
        "manifest": "manifest.json",
        "passed": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
    }
    if extra:
        payload["details"] = extra
    md = render_markdown(reports, title) + f"\nconfig hash: `{digest}`\n"
    md_path = out / "report.md"
    md_path.write_text(md, encoding="utf-8")
    return [_dump_json(out / "report.json", payload), md_path]


def write_manifest(out: Path, cfg: ExperimentConfig, files: Sequence[Path]) -> Path:
    """seed, full configuration, its hash and the files written"""
    payload = {
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "config_hash": cfg.config_hash(),
        "files": sorted(Path(f).name for f in files),
    }
    return _dump_json(out / "manifest.json", payload)
