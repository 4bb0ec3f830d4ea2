import hashlib
import json
import math
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from snlab.core.errors import SNLabError
from snlab.core.padic import is_prime
from snlab.core.rng import MAX_SEED
from snlab.core.signature import Signature

load_dotenv()

Count = Union[int, float]
FORMATS = ("csv", "json")
MAX_TEXT = 200


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise SNLabError(f"{name} must be an integer, got '{raw}'", "argument", "config")


def env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise SNLabError(f"{name} must be a number, got '{raw}'", "argument", "config")


def quiet() -> bool:
    """SNLAB_QUIET=1 turns progress bars off"""
    return os.getenv("SNLAB_QUIET", "0").strip().lower() in ("1", "true", "yes")


def default_out() -> Path:
    return Path(os.getenv("SNLAB_OUT", "./snlab-out"))


# ---------------------------------------------------------------------------
# Token parsing

def _clean(text: str) -> str:
    if text is None:
        return ""
    text = str(text).strip()
    if len(text) > MAX_TEXT:
        raise SNLabError(f"argument is too long ({len(text)} characters)", "argument", "config")
    return text


def parse_rational(text: Union[str, Fraction, float, int]) -> Fraction:
    """'1/2' or '0.5' -> Fraction(1, 2), parsed exactly"""
    if isinstance(text, (Fraction, int)):
        return Fraction(text)
    text = _clean(text)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SNLabError(f"'{text}' is not a rational number", "argument", "config")


def parse_ns(text: str) -> List[Count]:
    """'4,4,inf' -> [4, 4, inf]"""
    text = _clean(text)
    if not text:
        raise SNLabError("--N needs at least one value", "argument", "config")
    out: List[Count] = []
    for token in text.split(","):
        token = token.strip().lower()
        if token in ("inf", "infinity", "∞"):
            out.append(math.inf)
            continue
        try:
            out.append(int(token))
        except ValueError:
            raise SNLabError(f"'{token}' in --N is neither an integer nor 'inf'", "argument", "config")
    return out


def parse_precision(text: Union[str, int]) -> Union[int, str]:
    text = _clean(str(text)).lower()
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise SNLabError(f"--precision must be 'auto' or an integer, got '{text}'", "argument", "config")
    if value < 1:
        raise SNLabError(f"--precision must be positive, got {value}", "argument", "config")
    return value


def parse_signature(text: str) -> Signature:
    """'2,1,0' -> Signature((2, 1, 0))"""
    text = _clean(text).strip("()[]")
    try:
        parts = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise SNLabError(f"'{text}' is not a comma-separated list of integers", "argument", "config")
    return Signature(parts)


def _encode(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, Signature):
        return value.to_json()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    return value


# ---------------------------------------------------------------------------
# Experiment configuration

@dataclass
class ExperimentConfig:
    """Every parameter of one CLI invocation"""
    command: str
    p: int = 2
    t: Optional[Fraction] = None
    x: Optional[Fraction] = None
    n: int = 2
    Ns: List[Count] = field(default_factory=lambda: [math.inf])
    k: int = 1
    trials: int = 1
    seed: int = field(default_factory=lambda: env_int("SNLAB_SEED", 0))
    precision: Union[int, str] = "auto"
    tol_tv: float = field(default_factory=lambda: env_float("SNLAB_TOL_TV", 0.02))
    tol_p: float = field(default_factory=lambda: env_float("SNLAB_TOL_P", 0.001))
    out: Path = field(default_factory=default_out)
    format: str = "csv"
    workers: int = field(default_factory=lambda: env_int("SNLAB_WORKERS", 1))
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def t_value(self) -> Fraction:
        """t, defaulting to 1/p"""
        return self.t if self.t is not None else Fraction(1, self.p)

    def validate(self) -> "ExperimentConfig":
        if not is_prime(self.p):
            raise SNLabError(f"--p must be prime, got {self.p}", "argument", "config")
        if not 0 < self.t_value < 1:
            raise SNLabError(f"--t must lie in (0,1), got {self.t_value}", "argument", "config")
        if self.x is not None and not 0 < self.x < 1:
            raise SNLabError(f"--x must lie in (0,1), got {self.x}", "argument", "config")
        if self.n < 1:
            raise SNLabError(f"--n must be positive, got {self.n}", "argument", "config")
        if not self.Ns:
            raise SNLabError("--N needs at least one value", "argument", "config")
        for N in self.Ns:
            if N != math.inf and N <= self.n:
                raise SNLabError(f"every N must exceed n = {self.n}, got {N}", "argument", "config")
        if self.k < 0:
            raise SNLabError(f"--k must be nonnegative, got {self.k}", "argument", "config")
        if self.trials < 1:
            raise SNLabError(f"--trials must be positive, got {self.trials}", "argument", "config")
        if not 0 <= self.seed <= MAX_SEED:
            raise SNLabError(f"--seed must be a 64-bit unsigned integer, got {self.seed}", "argument", "config")
        if self.precision != "auto" and (not isinstance(self.precision, int) or self.precision < 1):
            raise SNLabError(f"--precision must be 'auto' or a positive integer, got {self.precision}", "argument", "config")
        if not 0 < self.tol_tv <= 1:
            raise SNLabError(f"--tol-tv must lie in (0,1], got {self.tol_tv}", "argument", "config")
        if not 0 < self.tol_p < 1:
            raise SNLabError(f"--tol-p must lie in (0,1), got {self.tol_p}", "argument", "config")
        if self.format not in FORMATS:
            raise SNLabError(f"--format must be one of {', '.join(FORMATS)}, got '{self.format}'", "argument", "config")
        if self.workers < 1:
            raise SNLabError(f"--workers must be positive, got {self.workers}", "argument", "config")
        return self

    def to_json(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["t"] = self.t_value
        # output location and worker count never change results
        data.pop("out")
        data.pop("workers")
        return _encode(data)

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """git-style blob hash of the canonical JSON"""
        body = self.canonical_json().encode("utf-8")
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()
