"""
Sparse multivariate Laurent polynomials with exact rational coefficients.

Terms are stored as a dict from exponent tuples (entries may be negative) to
nonzero Fractions; all exponent tuples have the same length.
"""

from fractions import Fraction
from itertools import permutations
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

from snlab.core.errors import SNLabError

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


class LaurentPolynomial:
    """Multivariate Laurent polynomial over Q"""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Dict[Exponent, Scalar]] = None):
        self.nvars = nvars
        self.terms: Dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            if len(exp) != nvars:
                raise SNLabError(f"exponent {exp} has wrong length for {nvars} variables", "argument", "symfunc")
            if c != 0:
                self.terms[tuple(exp)] = Fraction(c)

    @classmethod
    def constant(cls, nvars: int, c: Scalar = 1) -> "LaurentPolynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exp: Sequence[int], c: Scalar = 1) -> "LaurentPolynomial":
        return cls(len(exp), {tuple(exp): c})

    def copy(self) -> "LaurentPolynomial":
        out = LaurentPolynomial(self.nvars)
        out.terms = dict(self.terms)
        return out

    def _check(self, other: "LaurentPolynomial"):
        if other.nvars != self.nvars:
            raise SNLabError("polynomials live in different variable counts", "argument", "symfunc")

    def _coerce(self, other) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            self._check(other)
            return other
        return LaurentPolynomial.constant(self.nvars, other)

    def add_term(self, exp: Exponent, c: Scalar):
        """In-place accumulate c * x^exp"""
        if c == 0:
            return
        v = self.terms.get(exp, 0) + c
        if v == 0:
            self.terms.pop(exp, None)
        else:
            self.terms[exp] = Fraction(v)

    def __add__(self, other) -> "LaurentPolynomial":
        other = self._coerce(other)
        out = self.copy()
        for exp, c in other.terms.items():
            out.add_term(exp, c)
        return out

    __radd__ = __add__

    def __neg__(self) -> "LaurentPolynomial":
        out = LaurentPolynomial(self.nvars)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other) -> "LaurentPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPolynomial":
        if not isinstance(other, LaurentPolynomial):
            c = Fraction(other)
            out = LaurentPolynomial(self.nvars)
            if c != 0:
                out.terms = {e: v * c for e, v in self.terms.items()}
            return out
        self._check(other)
        out = LaurentPolynomial(self.nvars)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out.add_term(tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPolynomial":
        out = LaurentPolynomial.constant(self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPolynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        return self == self._coerce(other)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Exponent, Fraction]]:
        return iter(sorted(self.terms.items(), reverse=True))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        chunks = []
        for exp, c in self:
            mono = "*".join(f"x{i + 1}^{e}" if e != 1 else f"x{i + 1}" for i, e in enumerate(exp) if e)
            chunks.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(chunks)

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def shift(self, exp: Sequence[int]) -> "LaurentPolynomial":
        """Multiply by the monomial x^exp"""
        out = LaurentPolynomial(self.nvars)
        out.terms = {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()}
        return out

    def embed(self, positions: Sequence[int], nvars: int) -> "LaurentPolynomial":
        """Rename variable i to positions[i] inside a ring of nvars variables"""
        out = LaurentPolynomial(nvars)
        for e, c in self.terms.items():
            full = [0] * nvars
            for i, pos in enumerate(positions):
                full[pos] = e[i]
            out.terms[tuple(full)] = c
        return out

    def evaluate(self, values: Sequence[Scalar]) -> Fraction:
        if len(values) != self.nvars:
            raise SNLabError(f"expected {self.nvars} values, got {len(values)}", "argument", "symfunc")
        vals = [Fraction(v) for v in values]
        total = Fraction(0)
        for exp, c in self.terms.items():
            term = c
            for v, e in zip(vals, exp):
                if e == 0:
                    continue
                if v == 0 and e < 0:
                    raise SNLabError("negative power of a zero value", "domain", "symfunc")
                term *= v ** e
            total += term
        return total

    def leading_exponent(self) -> Exponent:
        """Lexicographically greatest exponent"""
        if not self.terms:
            raise SNLabError("zero polynomial has no leading term", "argument", "symfunc")
        return max(self.terms)

    def total_degrees(self) -> Iterable[int]:
        return {sum(e) for e in self.terms}

    def is_symmetric(self) -> bool:
        """Check invariance under adjacent transpositions on the stored terms"""
        n = self.nvars
        for i in range(n - 1):
            for exp, c in self.terms.items():
                swapped = exp[:i] + (exp[i + 1], exp[i]) + exp[i + 2:]
                if self.terms.get(swapped) != c:
                    return False
        return True

    def symmetrize_check(self) -> bool:
        """Full permutation check; used in tests on small variable counts"""
        return all(
            self.terms.get(tuple(exp[j] for j in perm)) == c
            for perm in permutations(range(self.nvars))
            for exp, c in self.terms.items()
        )


def potential(exp: Sequence[int]) -> int:
    """sum_j j * e_j, 1-indexed; multiplying by x_i^-1 x_j with i < j raises it"""
    return sum((j + 1) * e for j, e in enumerate(exp))
