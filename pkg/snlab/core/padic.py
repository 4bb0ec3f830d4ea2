"""
Matrices over Z/p^D: Haar sampling, corners, products and Smith normal form
with precision censoring.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from rich.console import Console

from snlab.core.errors import SNLabError
from snlab.core.rng import substream
from snlab.core.signature import Signature, reachable_Q
from snlab.core.trajectory import Trajectory

console = Console(stderr=True)

MAX_REJECTIONS = 10 ** 6
MAX_PRECISION_RETRIES = 3
_INT64_LIMIT = 2 ** 62


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PadicMatrix:
    """Matrix with entries reduced mod p^D"""
    p: int
    D: int
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise SNLabError(f"p = {self.p} is not prime", "argument", "padic")
        if self.D < 1:
            raise SNLabError(f"precision D must be >= 1, got {self.D}", "argument", "padic")
        M = self.p ** self.D
        rows = tuple(tuple(int(x) % M for x in row) for row in self.entries)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise SNLabError("ragged matrix rows", "argument", "padic")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], p: int, D: int) -> "PadicMatrix":
        return cls(p, D, tuple(tuple(r) for r in rows))

    @property
    def modulus(self) -> int:
        return self.p ** self.D

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "D": self.D,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [str(x) for row in self.entries for x in row],
        }


@dataclass(frozen=True)
class ExtendedSignature:
    """Singular numbers at precision D; `censored` parts are only known to be >= D"""
    finite: Tuple[int, ...]
    censored: int
    precision: int

    def __post_init__(self):
        if any(a < b for a, b in zip(self.finite, self.finite[1:])):
            raise SNLabError("finite parts must be weakly decreasing", "validation", "padic")
        if any(x >= self.precision for x in self.finite):
            raise SNLabError("finite parts must be below the precision", "validation", "padic")

    def __len__(self) -> int:
        return self.censored + len(self.finite)

    @property
    def is_censored(self) -> bool:
        return self.censored > 0

    @property
    def parts(self) -> Tuple[Optional[int], ...]:
        """None marks a censored part"""
        return (None,) * self.censored + self.finite

    def to_signature(self) -> Signature:
        if self.is_censored:
            raise SNLabError(
                f"singular numbers censored at precision {self.precision}", "resource", "padic"
            )
        return Signature(self.finite)

    def to_json(self) -> List[Union[int, str]]:
        return [f">={self.precision}"] * self.censored + list(self.finite)


# ---------------------------------------------------------------------------
# Arithmetic helpers

def valuation(x: int, p: int, D: int) -> int:
    """p-adic valuation of a residue mod p^D, capped at D"""
    x %= p ** D
    if x == 0:
        return D
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def unit_inverse(u: int, p: int, D: int) -> int:
    """Inverse of a unit mod p^D by Newton-Hensel lifting from the inverse mod p"""
    if u % p == 0:
        raise SNLabError(f"{u} is not a unit mod {p}", "domain", "padic")
    x = pow(u, p - 2, p) if p > 2 else 1
    prec = 1
    while prec < D:
        prec = min(2 * prec, D)
        M = p ** prec
        x = x * (2 - u * x) % M
    return x % (p ** D)


def _rank_mod_p(rows: List[List[int]], p: int) -> int:
    a = [[x % p for x in r] for r in rows]
    nrows, ncols = len(a), len(a[0]) if a else 0
    rank = 0
    for c in range(ncols):
        pivot = next((r for r in range(rank, nrows) if a[r][c]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = pow(a[rank][c], p - 2, p)
        for r in range(nrows):
            if r != rank and a[r][c]:
                f = a[r][c] * inv % p
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def _uniform_residues(rng: np.random.Generator, p: int, D: int, shape: Tuple[int, int]) -> List[List[int]]:
    M = p ** D
    if M <= _INT64_LIMIT:
        return rng.integers(0, M, size=shape, dtype=np.int64).tolist()
    c = 1
    while p ** (c + 1) <= _INT64_LIMIT:
        c += 1
    chunk = p ** c
    nchunks = -(-D // c)
    digits = rng.integers(0, chunk, size=shape + (nchunks,), dtype=np.int64).tolist()
    out = []
    for row in digits:
        vals = []
        for ds in row:
            x = 0
            for d in reversed(ds):
                x = x * chunk + d
            # p^D divides chunk^nchunks, so reducing keeps uniformity
            vals.append(x % M)
        out.append(vals)
    return out


# ---------------------------------------------------------------------------
# Sampling

def haar_gl_with_attempts(N: int, p: int, D: int, rng: np.random.Generator) -> Tuple[PadicMatrix, int]:
    """Haar element of GL_N(Z/p^D) and the number of draws it took"""
    if N < 1 or D < 1:
        raise SNLabError(f"need N >= 1 and D >= 1, got N={N}, D={D}", "argument", "padic")
    for attempt in range(1, MAX_REJECTIONS + 1):
        base = rng.integers(0, p, size=(N, N), dtype=np.int64).tolist()
        if _rank_mod_p(base, p) == N:
            break
    else:
        raise SNLabError("Haar rejection sampler hit its iteration cap", "internal", "padic")
    if D > 1:
        lift = _uniform_residues(rng, p, D - 1, (N, N))
        base = [[b + p * l for b, l in zip(br, lr)] for br, lr in zip(base, lift)]
    return PadicMatrix.from_rows(base, p, D), attempt


def haar_gl(N: int, p: int, D: int, rng: np.random.Generator) -> PadicMatrix:
    """Uniform element of GL_N(Z/p^D): uniform mod p^D conditioned on invertibility mod p"""
    return haar_gl_with_attempts(N, p, D, rng)[0]


def haar_additive(n: int, m: int, p: int, D: int, rng: np.random.Generator) -> PadicMatrix:
    """n x m matrix of iid uniform residues mod p^D"""
    if n < 1 or m < 1 or D < 1:
        raise SNLabError(f"need positive dimensions and precision, got {n}x{m}, D={D}", "argument", "padic")
    return PadicMatrix.from_rows(_uniform_residues(rng, p, D, (n, m)), p, D)


def identity(n: int, p: int, D: int) -> PadicMatrix:
    return PadicMatrix.from_rows([[int(i == j) for j in range(n)] for i in range(n)], p, D)


def diag_matrix(parts: Sequence[int], p: int, D: int, rows: Optional[int] = None, cols: Optional[int] = None) -> PadicMatrix:
    """diag(p^{parts}) padded to rows x cols"""
    rows = len(parts) if rows is None else rows
    cols = len(parts) if cols is None else cols
    M = p ** D
    data = [[0] * cols for _ in range(rows)]
    for i, e in enumerate(parts):
        data[i][i] = pow(p, e, M) if e < D else 0
    return PadicMatrix.from_rows(data, p, D)


def corner(A: PadicMatrix, nrows: int, ncols: int) -> PadicMatrix:
    """Top-left nrows x ncols block"""
    if not (0 < nrows <= A.rows and 0 < ncols <= A.cols):
        raise SNLabError(f"corner {nrows}x{ncols} out of range for a {A.rows}x{A.cols} matrix", "argument", "padic")
    return PadicMatrix(A.p, A.D, tuple(row[:ncols] for row in A.entries[:nrows]))


def matmul(A: PadicMatrix, B: PadicMatrix) -> PadicMatrix:
    if A.p != B.p or A.D != B.D:
        raise SNLabError("matmul needs matching p and D", "argument", "padic")
    if A.cols != B.rows:
        raise SNLabError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}", "argument", "padic")
    M = A.modulus
    if M * M * max(A.cols, 1) < 2 ** 63:
        prod = np.array(A.entries, dtype=np.int64) @ np.array(B.entries, dtype=np.int64)
        return PadicMatrix.from_rows((prod % M).tolist(), A.p, A.D)
    prod = np.array(A.entries, dtype=object) @ np.array(B.entries, dtype=object)
    return PadicMatrix.from_rows([[x % M for x in row] for row in prod.tolist()], A.p, A.D)


def bi_invariant(lam: Sequence[int], p: int, D: int, rng: np.random.Generator) -> PadicMatrix:
    """U diag(p^lam) V with U, V Haar on GL_n; law is invariant on both sides"""
    n = len(lam)
    U = haar_gl(n, p, D, rng)
    V = haar_gl(n, p, D, rng)
    return matmul(matmul(U, diag_matrix(lam, p, D)), V)


# ---------------------------------------------------------------------------
# Smith normal form

def smith(A: PadicMatrix) -> ExtendedSignature:
    """Singular numbers of A; parts >= D come back censored"""
    p, D, M = A.p, A.D, A.modulus
    a = [list(row) for row in A.entries]
    nrows, ncols = A.rows, A.cols
    r = min(nrows, ncols)
    found: List[int] = []
    censored = 0
    for s in range(r):
        best = None
        for i in range(s, nrows):
            for j in range(s, ncols):
                v = valuation(a[i][j], p, D)
                if best is None or v < best[0]:
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        v, pi, pj = best
        if v >= D:
            censored = r - s
            break
        a[s], a[pi] = a[pi], a[s]
        for row in a:
            row[s], row[pj] = row[pj], row[s]
        pv = p ** v
        inv = unit_inverse(a[s][s] // pv, p, D)
        pivot_row = a[s]
        for i in range(s + 1, nrows):
            if a[i][s]:
                f = (a[i][s] // pv) * inv % M
                a[i] = [(x - f * y) % M for x, y in zip(a[i], pivot_row)]
        # column clearing only touches row s, which is never read again
        found.append(v)
    return ExtendedSignature(tuple(sorted(found, reverse=True)), censored, D)


# ---------------------------------------------------------------------------
# Product chains

def auto_precision(k: int, p: int, target: int = 0) -> int:
    """D for k chain steps, leaving room for parts up to target"""
    if target < 0:
        raise SNLabError(f"precision target must be nonnegative, got {target}", "argument", "padic")
    return math.ceil(k / (p - 1) + 8 * math.sqrt(k + 1) + target + 8)


def _chain_factor(n: int, N: Union[int, float], p: int, D: int, rng: np.random.Generator) -> PadicMatrix:
    if N == math.inf:
        return haar_additive(n, n, p, D, rng)
    return corner(haar_gl(int(N), p, D, rng), n, n)


def sn_product_chain(
    n: int,
    Ns: Sequence[Union[int, float]],
    p: int,
    k: int,
    D: Union[int, str],
    rng: np.random.Generator,
    factory: Optional[Callable[[int, int], PadicMatrix]] = None,
    target: int = 0,
) -> Trajectory:
    """SN(A_1), SN(A_2 A_1), ..., SN(A_k ... A_1) with A_j the n x n corner of Haar GL_{N_j}"""
    if n < 1 or k < 1:
        raise SNLabError(f"need n >= 1 and k >= 1, got n={n}, k={k}", "argument", "padic")
    if not Ns:
        raise SNLabError("need at least one corner size N", "argument", "padic")
    for N in Ns:
        if N != math.inf and N <= n:
            raise SNLabError(f"corner sizes must exceed n = {n}, got N = {N}", "argument", "padic")
    auto = D == "auto"
    prec = auto_precision(k, p, target) if auto else int(D)
    stream = rng
    for attempt in range(MAX_PRECISION_RETRIES + 1):
        traj = _run_chain(n, Ns, p, k, prec, stream, factory)
        if not traj.meta["censored"]:
            return traj
        if not auto:
            return traj
        console.print(f"[yellow]⚠️ precision {prec} censored a part, retrying at {2 * prec}[/yellow]")
        prec *= 2
        stream = substream(rng)
    raise SNLabError(f"singular numbers still censored at precision {prec // 2}", "resource", "padic")


def _run_chain(n, Ns, p, k, D, rng, factory) -> Trajectory:
    running = identity(n, p, D)
    traj = Trajectory(n, [Signature((0,) * n)], {"source": "matrix", "p": p, "precision": D, "censored": False})
    for j in range(k):
        N = Ns[j % len(Ns)]
        A = factory(j, D) if factory is not None else _chain_factor(n, N, p, D, rng)
        running = matmul(A, running)
        sn = smith(running)
        if sn.is_censored:
            traj.meta["censored"] = True
            return traj
        lam = sn.to_signature()
        if not reachable_Q(traj.final, lam, N - n):
            raise SNLabError(f"non-interlacing step {traj.final} -> {lam}", "internal", "padic")
        traj.append(lam)
    return traj
