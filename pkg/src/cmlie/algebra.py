"""Exact arithmetic over multivariate polynomials and rational functions.

Every symbolic object in an analysis session lives over one fixed, ordered
tuple of symbol names (the "ambient" symbol list).  Values are built from
three layers:

  Fraction                  -- arbitrary-precision rationals (stdlib),
                               always normalized (gcd 1, positive denominator)
  MultiPoly                 -- sparse multivariate polynomial:
                               {exponent tuple -> Fraction}, zero terms pruned
  RatFunc                   -- ratio of two MultiPoly over the same symbols

RatFunc is *not* reduced to lowest terms in general (no polynomial GCD);
equality is decided by cross-multiplication, which is exact and total.  The
constructor performs cheap normalizations only: constant denominators fold
into the numerator, an exact single-divisor division is attempted, and the
denominator is scaled so its graded-lex leading coefficient is 1.

PolyMatrix provides exact linear algebra over the rational-function field
(inverse, determinant, linear solve) by Gauss-Jordan elimination with
first-nonzero pivoting; there is no magnitude to pivot on over a symbolic
field.

All values are immutable after construction; operations are pure functions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

#: Arbitrary-precision rational scalar used for every coefficient.
BigRational = Fraction

#: Exponent vector of a monomial, aligned with an ambient symbol tuple.
Exponents = tuple[int, ...]

Scalar = Union[int, Fraction]


class SymbolMismatchError(ValueError):
    """Two operands do not share the same ordered symbol list."""


class UnknownSymbolError(ValueError):
    """A symbol name is not present in the ambient symbol list."""


class ZeroDenominatorError(ZeroDivisionError):
    """A rational function acquired an identically-zero denominator."""


class SingularMatrixError(ValueError):
    """The matrix is singular over the rational-function field."""


class InconsistentSystemError(SingularMatrixError):
    """A linear system has no solution over the rational-function field."""


def grlex_key(mono: Exponents) -> tuple[int, Exponents]:
    """Sort key for graded lexicographic order (degree first, then lex)."""
    return (sum(mono), mono)


def _as_fraction(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational scalar, got {type(value).__name__}")


class MultiPoly:
    """Sparse multivariate polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples (one entry per ambient symbol) to nonzero
    Fraction coefficients.  The zero polynomial has an empty term map, so two
    polynomials over the same symbols are equal iff their term maps are equal.
    """

    __slots__ = ("symbols", "terms")

    def __init__(self, symbols: Sequence[str], terms: Mapping[Exponents, Fraction]):
        object.__setattr__(self, "symbols", tuple(symbols))
        pruned = {}
        width = len(self.symbols)
        for mono, coeff in terms.items():
            if coeff == 0:
                continue
            if len(mono) != width:
                raise SymbolMismatchError(
                    f"monomial {mono} has {len(mono)} exponents, expected {width}"
                )
            pruned[tuple(mono)] = Fraction(coeff)
        object.__setattr__(self, "terms", pruned)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("MultiPoly is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, symbols: Sequence[str]) -> "MultiPoly":
        return cls(symbols, {})

    @classmethod
    def const(cls, symbols: Sequence[str], value: Scalar) -> "MultiPoly":
        c = _as_fraction(value)
        if c == 0:
            return cls.zero(symbols)
        return cls(symbols, {(0,) * len(tuple(symbols)): c})

    @classmethod
    def variable(cls, symbols: Sequence[str], name: str) -> "MultiPoly":
        symbols = tuple(symbols)
        try:
            idx = symbols.index(name)
        except ValueError:
            raise UnknownSymbolError(f"symbol {name!r} not in {symbols}") from None
        mono = tuple(1 if i == idx else 0 for i in range(len(symbols)))
        return cls(symbols, {mono: Fraction(1)})

    # -- predicates and views ---------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def constant_value(self) -> Fraction:
        """Value of a constant polynomial (zero for the zero polynomial)."""
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def total_degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, names: Iterable[str]) -> int:
        """Largest combined degree of the given symbols across terms (-1 if zero)."""
        idx = self._indices_of(names)
        if not self.terms:
            return -1
        return max(sum(m[i] for i in idx) for m in self.terms)

    def uses(self, name: str) -> bool:
        i = self._index_of(name)
        return any(m[i] for m in self.terms)

    def free_symbols(self) -> set[str]:
        """Names that occur with nonzero exponent in some term."""
        used = set()
        for mono in self.terms:
            for i, e in enumerate(mono):
                if e:
                    used.add(self.symbols[i])
        return used

    def leading(self) -> tuple[Exponents, Fraction]:
        """Graded-lex leading term of a nonzero polynomial."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self.terms, key=grlex_key)
        return mono, self.terms[mono]

    def sorted_terms(self) -> list[tuple[Exponents, Fraction]]:
        """Terms in descending graded-lex order (printing order)."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def _index_of(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise UnknownSymbolError(f"symbol {name!r} not in {self.symbols}") from None

    def _indices_of(self, names: Iterable[str]) -> list[int]:
        return [self._index_of(n) for n in names]

    def _check_same(self, other: "MultiPoly") -> None:
        if self.symbols != other.symbols:
            raise SymbolMismatchError(
                f"symbol lists differ: {self.symbols} vs {other.symbols}"
            )

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.symbols, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same(other)
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coeff
        return MultiPoly(self.symbols, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.symbols, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(self.symbols, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return MultiPoly.zero(self.symbols)
            return MultiPoly(self.symbols, {m: k * c for m, k in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_same(other)
        out: dict[Exponents, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                mono = tuple(x + y for x, y in zip(ma, mb))
                out[mono] = out.get(mono, Fraction(0)) + ca * cb
        return MultiPoly(self.symbols, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"polynomial exponent must be a non-negative integer, got {n!r}")
        result = MultiPoly.const(self.symbols, 1)
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.symbols == other.symbols and self.terms == other.terms

    __hash__ = None

    # -- calculus and evaluation --------------------------------------------

    def diff(self, name: str) -> "MultiPoly":
        """Exact partial derivative with respect to ``name``."""
        i = self._index_of(name)
        out: dict[Exponents, Fraction] = {}
        for mono, coeff in self.terms.items():
            e = mono[i]
            if e == 0:
                continue
            dm = mono[:i] + (e - 1,) + mono[i + 1 :]
            out[dm] = out.get(dm, Fraction(0)) + coeff * e
        return MultiPoly(self.symbols, out)

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a rational point binding every symbol that occurs."""
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            term = coeff
            for i, e in enumerate(mono):
                if e:
                    term *= _as_fraction(self._lookup(values, i)) ** e
            total += term
        return total

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        """Double-precision value; only symbols that occur need bindings."""
        total = 0.0
        for mono, coeff in self.terms.items():
            term = float(coeff)
            for i, e in enumerate(mono):
                if e:
                    term *= float(self._lookup(values, i)) ** e
            total += term
        return total

    def _lookup(self, values: Mapping[str, object], i: int):
        try:
            return values[self.symbols[i]]
        except KeyError:
            raise UnknownSymbolError(f"no binding for symbol {self.symbols[i]!r}") from None

    def reindexed(self, symbols: Sequence[str]) -> "MultiPoly":
        """Re-express over a different symbol list covering all used names."""
        symbols = tuple(symbols)
        pos = {s: i for i, s in enumerate(symbols)}
        out: dict[Exponents, Fraction] = {}
        for mono, coeff in self.terms.items():
            new = [0] * len(symbols)
            for i, e in enumerate(mono):
                if not e:
                    continue
                name = self.symbols[i]
                if name not in pos:
                    raise UnknownSymbolError(
                        f"symbol {name!r} not present in target list {symbols}"
                    )
                new[pos[name]] = e
            key = tuple(new)
            out[key] = out.get(key, Fraction(0)) + coeff
        return MultiPoly(symbols, out)

    def truncated(self, names: Iterable[str], max_degree: int) -> "MultiPoly":
        """Drop terms whose combined degree in ``names`` exceeds ``max_degree``."""
        idx = self._indices_of(names)
        kept = {m: c for m, c in self.terms.items() if sum(m[i] for i in idx) <= max_degree}
        return MultiPoly(self.symbols, kept)

    def exact_div(self, divisor: "MultiPoly") -> "MultiPoly | None":
        """Exact quotient self / divisor, or None when not divisible.

        Leading-term division in graded-lex order: when self = q * divisor the
        reduction always succeeds, so a None return is a proof of
        non-divisibility.
        """
        self._check_same(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        dm, dc = divisor.leading()
        quotient: dict[Exponents, Fraction] = {}
        rest = self
        while rest.terms:
            rm, rc = rest.leading()
            step = tuple(a - b for a, b in zip(rm, dm))
            if any(e < 0 for e in step):
                return None
            c = rc / dc
            quotient[step] = c
            rest = rest - MultiPoly(self.symbols, {step: c}) * divisor
        return MultiPoly(self.symbols, quotient)

    def content(self) -> Fraction:
        """Positive rational content (gcd of coefficients); 1 for zero."""
        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = _gcd(num, abs(c.numerator))
            den = _lcm(den, c.denominator)
        return Fraction(num, den)

    def __str__(self) -> str:
        from .expr import render_poly

        return render_poly(self)

    def __repr__(self) -> str:
        return f"MultiPoly({self})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _lcm(a: int, b: int) -> int:
    return a * b // _gcd(a, b) if a and b else max(a, b)


RatLike = Union["RatFunc", MultiPoly, int, Fraction]


class RatFunc:
    """Ratio of two polynomials over a shared symbol list.

    No canonical form is maintained; use ``==`` (cross-multiplication) to
    compare values.  The denominator is never the zero polynomial, never
    gains state symbols that were not already present, and is scaled so its
    graded-lex leading coefficient is 1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None):
        if den is None:
            den = MultiPoly.const(num.symbols, 1)
        num._check_same(den)
        if den.is_zero:
            raise ZeroDenominatorError("denominator is identically zero")
        if num.is_zero:
            den = MultiPoly.const(num.symbols, 1)
        elif den.is_constant:
            num = num * (1 / den.constant_value())
            den = MultiPoly.const(num.symbols, 1)
        else:
            quotient = num.exact_div(den)
            if quotient is not None:
                num = quotient
                den = MultiPoly.const(num.symbols, 1)
            else:
                lead = den.leading()[1]
                if lead != 1:
                    inv = 1 / lead
                    num = num * inv
                    den = den * inv
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("RatFunc is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, symbols: Sequence[str]) -> "RatFunc":
        return cls(MultiPoly.zero(symbols))

    @classmethod
    def one(cls, symbols: Sequence[str]) -> "RatFunc":
        return cls(MultiPoly.const(symbols, 1))

    @classmethod
    def const(cls, symbols: Sequence[str], value: Scalar) -> "RatFunc":
        return cls(MultiPoly.const(symbols, value))

    @classmethod
    def variable(cls, symbols: Sequence[str], name: str) -> "RatFunc":
        return cls(MultiPoly.variable(symbols, name))

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.num.symbols

    def _coerce(self, other: RatLike) -> "RatFunc":
        if isinstance(other, RatFunc):
            self.num._check_same(other.num)
            return other
        if isinstance(other, MultiPoly):
            self.num._check_same(other)
            return RatFunc(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc.const(self.symbols, other)
        raise TypeError(f"cannot combine RatFunc with {type(other).__name__}")

    # -- field operations ---------------------------------------------------

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.num.is_zero:
            raise ZeroDenominatorError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"rational-function exponent must be a non-negative integer, got {n!r}")
        return RatFunc(self.num**n, self.den**n)

    def __eq__(self, other):
        """Exact value equality by cross-multiplication."""
        try:
            o = self._coerce(other)
        except (TypeError, SymbolMismatchError):
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero

    __hash__ = None

    # -- predicates ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.num.is_constant and self.den.is_constant

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def uses(self, name: str) -> bool:
        return self.num.uses(name) or self.den.uses(name)

    def free_symbols(self) -> set[str]:
        return self.num.free_symbols() | self.den.free_symbols()

    def denominator_symbols(self) -> set[str]:
        return self.den.free_symbols()

    # -- calculus, substitution, evaluation ----------------------------------

    def diff(self, name: str) -> "RatFunc":
        """Exact partial derivative (quotient rule)."""
        dn = self.num.diff(name)
        if not self.den.uses(name):
            return RatFunc(dn, self.den)
        dd = self.den.diff(name)
        return RatFunc(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(
        self,
        bindings: Mapping[str, RatLike],
        symbols: Sequence[str] | None = None,
    ) -> "RatFunc":
        """Exact composition: replace bound symbols, pass the rest through.

        ``symbols`` names the target ambient list (defaults to this value's
        own).  Every bound symbol must belong to the source list; every
        unbound-but-used symbol must exist in the target list.
        """
        target = tuple(symbols) if symbols is not None else self.symbols
        for name in bindings:
            if name not in self.symbols:
                raise UnknownSymbolError(f"bound symbol {name!r} not in {self.symbols}")
        table: dict[str, RatFunc] = {}
        for name, value in bindings.items():
            if isinstance(value, RatFunc):
                if value.symbols != target:
                    raise SymbolMismatchError(
                        f"binding for {name!r} lives over {value.symbols}, expected {target}"
                    )
                table[name] = value
            elif isinstance(value, MultiPoly):
                if value.symbols != target:
                    raise SymbolMismatchError(
                        f"binding for {name!r} lives over {value.symbols}, expected {target}"
                    )
                table[name] = RatFunc(value)
            else:
                table[name] = RatFunc.const(target, value)
        num = _poly_substitute(self.num, table, target)
        den = _poly_substitute(self.den, table, target)
        if den.is_zero:
            raise ZeroDenominatorError("substitution produced an identically-zero denominator")
        return num / den

    def reindexed(self, symbols: Sequence[str]) -> "RatFunc":
        return RatFunc(self.num.reindexed(symbols), self.den.reindexed(symbols))

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDenominatorError("denominator vanishes at the evaluation point")
        return self.num.evaluate(values) / d

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        d = self.den.evaluate_float(values)
        if d == 0.0:
            raise ZeroDenominatorError("denominator vanishes at the evaluation point")
        return self.num.evaluate_float(values) / d

    def truncated(self, names: Iterable[str], max_degree: int) -> "RatFunc":
        """Drop numerator terms of combined ``names``-degree above ``max_degree``.

        The denominator must be free of ``names`` so truncation is well defined.
        """
        for n in names:
            if self.den.uses(n):
                raise ValueError(f"cannot truncate: denominator involves {n!r}")
        return RatFunc(self.num.truncated(names, max_degree), self.den)

    def coefficient_map(self, names: Sequence[str]) -> dict[Exponents, "RatFunc"]:
        """Group by monomials in ``names``: {exponents -> rational coefficient}.

        Requires a denominator free of ``names``.  Exponent tuples align with
        the order of ``names``.
        """
        for n in names:
            if self.den.uses(n):
                raise ValueError(f"cannot extract coefficients: denominator involves {n!r}")
        idx = self.num._indices_of(names)
        groups: dict[Exponents, dict[Exponents, Fraction]] = {}
        for mono, coeff in self.num.terms.items():
            key = tuple(mono[i] for i in idx)
            rest = list(mono)
            for i in idx:
                rest[i] = 0
            bucket = groups.setdefault(key, {})
            rest_t = tuple(rest)
            bucket[rest_t] = bucket.get(rest_t, Fraction(0)) + coeff
        return {
            key: RatFunc(MultiPoly(self.symbols, bucket), self.den)
            for key, bucket in groups.items()
            if any(c != 0 for c in bucket.values())
        }

    def __str__(self) -> str:
        from .expr import render_expr

        return render_expr(self)

    def __repr__(self) -> str:
        return f"RatFunc({self})"


def _poly_substitute(
    poly: MultiPoly, table: Mapping[str, RatFunc], target: tuple[str, ...]
) -> RatFunc:
    """Evaluate a polynomial with symbols bound to rational functions."""
    passthrough: dict[int, RatFunc] = {}
    for i, name in enumerate(poly.symbols):
        if name in table:
            passthrough[i] = table[name]
        elif poly.uses(name):
            passthrough[i] = RatFunc.variable(target, name)
    # Cache powers of each base to avoid repeated multiplication.
    powers: dict[tuple[int, int], RatFunc] = {}

    def power(i: int, e: int) -> RatFunc:
        key = (i, e)
        if key not in powers:
            powers[key] = passthrough[i] ** e
        return powers[key]

    total = RatFunc.zero(target)
    for mono, coeff in poly.terms.items():
        term = RatFunc.const(target, coeff)
        for i, e in enumerate(mono):
            if e:
                term = term * power(i, e)
        total = total + term
    return total


def ratfunc_eq(a: RatFunc, b: RatLike) -> bool:
    """Exact equality of rational functions by cross-multiplication."""
    result = a == b
    if result is NotImplemented:  # pragma: no cover - defensive
        raise TypeError(f"cannot compare RatFunc with {type(b).__name__}")
    return result


class PolyMatrix:
    """Dense rows x cols matrix of RatFunc entries (row-major)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Sequence[RatFunc]):
        if rows <= 0 or cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        first = entries[0]
        for e in entries[1:]:
            first.num._check_same(e.num)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("PolyMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RatFunc]]) -> "PolyMatrix":
        r = len(rows)
        if r == 0:
            raise ValueError("matrix needs at least one row")
        c = len(rows[0])
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(row)
        return cls(r, c, flat)

    @classmethod
    def identity(cls, n: int, symbols: Sequence[str]) -> "PolyMatrix":
        one = RatFunc.one(symbols)
        zero = RatFunc.zero(symbols)
        return cls(n, n, [one if i == j else zero for i in range(n) for j in range(n)])

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.entries[0].symbols

    def entry(self, i: int, j: int) -> RatFunc:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[RatFunc, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[RatFunc]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def map(self, fn: Callable[[RatFunc], RatFunc]) -> "PolyMatrix":
        return PolyMatrix(self.rows, self.cols, [fn(e) for e in self.entries])

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(
            self.cols, self.rows, [self.entry(i, j) for j in range(self.cols) for i in range(self.rows)]
        )

    def __mul__(self, other):
        if isinstance(other, PolyMatrix):
            if self.cols != other.rows:
                raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
            out = []
            for i in range(self.rows):
                for j in range(other.cols):
                    acc = RatFunc.zero(self.symbols)
                    for k in range(self.cols):
                        acc = acc + self.entry(i, k) * other.entry(k, j)
                    out.append(acc)
            return PolyMatrix(self.rows, other.cols, out)
        return NotImplemented

    def mul_vector(self, vec: Sequence[RatFunc]) -> list[RatFunc]:
        if len(vec) != self.cols:
            raise ValueError(f"vector length {len(vec)} does not match {self.cols} columns")
        out = []
        for i in range(self.rows):
            acc = RatFunc.zero(self.symbols)
            for k in range(self.cols):
                acc = acc + self.entry(i, k) * vec[k]
            out.append(acc)
        return out

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        return all(a == b for a, b in zip(self.entries, other.entries))

    __hash__ = None

    def _eliminate(self, augment: list[list[RatFunc]]) -> tuple[list[list[RatFunc]], list[int], RatFunc]:
        """Gauss-Jordan on [self | augment]; returns (reduced rows, pivot cols, det).

        Pivoting takes the first row with a nonzero entry (exact test); the
        determinant accumulates pivots and row-swap signs and is only
        meaningful for square matrices reduced to full rank.
        """
        n, m = self.rows, self.cols
        work = [list(self.row(i)) + list(augment[i]) for i in range(n)]
        det = RatFunc.one(self.symbols)
        pivots: list[int] = []
        r = 0
        for col in range(m):
            pivot_row = None
            for i in range(r, n):
                if not work[i][col].is_zero:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            if pivot_row != r:
                work[r], work[pivot_row] = work[pivot_row], work[r]
                det = -det
            pivot = work[r][col]
            det = det * pivot
            inv = RatFunc.one(self.symbols) / pivot
            work[r] = [e * inv for e in work[r]]
            for i in range(n):
                if i != r and not work[i][col].is_zero:
                    factor = work[i][col]
                    work[i] = [a - factor * b for a, b in zip(work[i], work[r])]
            pivots.append(col)
            r += 1
            if r == n:
                break
        if r < min(n, m):
            det = RatFunc.zero(self.symbols)
        return work, pivots, det

    def det(self) -> RatFunc:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        _, pivots, det = self._eliminate([[] for _ in range(self.rows)])
        if len(pivots) < self.rows:
            return RatFunc.zero(self.symbols)
        return det

    def inverse(self) -> "PolyMatrix":
        """Exact inverse over the rational-function field."""
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        eye = PolyMatrix.identity(n, self.symbols)
        work, pivots, _ = self._eliminate(eye.to_rows())
        if len(pivots) < n:
            raise SingularMatrixError("matrix is singular over the rational-function field")
        return PolyMatrix(n, n, [work[i][n + j] for i in range(n) for j in range(n)])

    def solve(self, rhs: Sequence[RatFunc]) -> list[RatFunc]:
        """Exact solution of self * x = rhs (square systems only)."""
        if self.rows != self.cols:
            raise ValueError("solve expects a square matrix")
        if len(rhs) != self.rows:
            raise ValueError(f"rhs length {len(rhs)} does not match {self.rows} rows")
        work, pivots, _ = self._eliminate([[b] for b in rhs])
        n = self.rows
        if len(pivots) < n:
            for i in range(len(pivots), n):
                if not work[i][n].is_zero:
                    raise InconsistentSystemError("linear system has no solution")
            raise SingularMatrixError("linear system is singular (solution not unique)")
        x = [work[i][n] for i in range(n)]
        check = self.mul_vector(x)
        if any(not (a == b) for a, b in zip(check, rhs)):  # pragma: no cover - internal
            raise AssertionError("exact linear solve failed verification")
        return x

    def __str__(self) -> str:
        rows = ["[" + ", ".join(str(e) for e in self.row(i)) + "]" for i in range(self.rows)]
        return "[" + "; ".join(rows) + "]"

    def __repr__(self) -> str:
        return f"PolyMatrix({self})"


def monomials_of_degree(count: int, degree: int) -> list[Exponents]:
    """All exponent tuples of the given total degree, descending graded-lex."""
    if count == 0:
        return [()] if degree == 0 else []
    combos = []
    for bars in itertools.combinations_with_replacement(range(count), degree):
        exps = [0] * count
        for b in bars:
            exps[b] += 1
        combos.append(tuple(exps))
    combos.sort(key=grlex_key, reverse=True)
    return combos
