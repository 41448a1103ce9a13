"""The square-free generator algebra: reduction to the strict-partition
basis, coproduct, odd-power-sum coordinates, the classical orthogonal
family, and eigenvalue specializations of the generating series.

The algebra is generated by q_1, q_2, ... subject to the single relation
family encoded by q(U) q(-U) = 1, where q(U) = 1 + q_1 U + q_2 U^2 + ... .
Extracting the coefficient of U^(2i) gives the rewriting rule

    q_i^2 = 2 * sum_{a=0}^{i-1} (-1)^(i+a+1) q_a q_(2i-a)      (q_0 = 1),

so monomials q_(lam) over *strict* partitions lam form a basis.  The odd
coordinates x_k (k >= 0) are defined through

    log q(U) = sum_k (2 x_k / (2k+1)) U^(2k+1),

and the inner product makes the x-monomials orthogonal with
<x_k, x_k> = (2k+1)/2.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import DomainError, IncompatibleOperands
from .rings import SparsePoly, UQ, UX, as_fraction, symbol_universe
from .series import TruncatedSeries

Partition = tuple[int, ...]  # strictly decreasing, entries >= 1


def _as_multiset(parts: Iterable[int]) -> Partition:
    ms = tuple(sorted((p for p in parts if p != 0), reverse=True))
    if any(p < 1 for p in ms):
        raise DomainError(f"bad generator indices {ms}")
    return ms


def is_strict(parts: Partition) -> bool:
    return all(a > b for a, b in zip(parts, parts[1:]))


def square_expansion(i: int) -> list[tuple[Partition, int]]:
    """The rewriting of the pair q_i q_i as square-free pairs:
    [(multiset, coefficient), ...]."""
    out = []
    for a in range(i):
        coeff = 2 * (-1) ** (i + a + 1)
        ms = (2 * i - a,) if a == 0 else _as_multiset((a, 2 * i - a))
        out.append((ms, coeff))
    return out


_REDUCE_MEMO: dict[Partition, dict[Partition, Fraction]] = {}


def q_reduce(parts: Iterable[int]) -> dict[Partition, Fraction]:
    """Rewrite a monomial q_(m1) q_(m2) ... (any multiset of indices) in the
    strict-partition basis.  Iterative with explicit stack so deep rewrites
    never hit the recursion limit; results are memoized across calls (the
    returned dicts are shared — treat them as read-only)."""
    target = _as_multiset(parts)
    memo = _REDUCE_MEMO
    stack = [target]
    while stack:
        ms = stack[-1]
        if ms in memo:
            stack.pop()
            continue
        rep = None
        for a, b in zip(ms, ms[1:]):
            if a == b:
                rep = a
                break
        if rep is None:
            memo[ms] = {ms: Fraction(1)}
            stack.pop()
            continue
        rest = list(ms)
        rest.remove(rep)
        rest.remove(rep)
        children = [(_as_multiset(tuple(rest) + child), coeff)
                    for child, coeff in square_expansion(rep)]
        pending = [c for c, _ in children if c not in memo]
        if pending:
            stack.extend(pending)
            continue
        acc: dict[Partition, Fraction] = {}
        for child, coeff in children:
            for basis, c in memo[child].items():
                val = acc.get(basis, Fraction(0)) + coeff * c
                if val:
                    acc[basis] = val
                elif basis in acc:
                    del acc[basis]
        memo[ms] = acc
        stack.pop()
    return memo[target]


class QElement:
    """Element of the square-free algebra in the strict-partition basis."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Partition, Fraction] | None = None):
        self.terms: dict[Partition, Fraction] = {}
        if terms:
            for part, c in terms.items():
                part = tuple(part)
                if not is_strict(part):
                    raise DomainError(f"{part} is not strict; reduce first")
                c = as_fraction(c)
                if c:
                    self.terms[part] = self.terms.get(part, Fraction(0)) + c
                    if not self.terms[part]:
                        del self.terms[part]

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "QElement":
        return cls()

    @classmethod
    def one(cls) -> "QElement":
        return cls({(): Fraction(1)})

    @classmethod
    def gen(cls, n: int) -> "QElement":
        if n < 1:
            raise DomainError("generators are q_1, q_2, ...")
        return cls({(n,): Fraction(1)})

    @classmethod
    def monomial(cls, parts: Iterable[int], coeff=1) -> "QElement":
        out = cls()
        for basis, c in q_reduce(parts).items():
            out.terms[basis] = as_fraction(coeff) * c
            if not out.terms[basis]:
                del out.terms[basis]
        return out

    # -- ring structure ----------------------------------------------------
    def _coerce(self, other) -> "QElement | None":
        if isinstance(other, QElement):
            return other
        if isinstance(other, (int, Fraction)):
            return QElement({(): as_fraction(other)})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = QElement(self.terms)
        for p, c in o.terms.items():
            v = out.terms.get(p, Fraction(0)) + c
            if v:
                out.terms[p] = v
            elif p in out.terms:
                del out.terms[p]
        return out

    __radd__ = __add__

    def __neg__(self):
        return QElement({p: -c for p, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = QElement()
        for p1, c1 in self.terms.items():
            for p2, c2 in o.terms.items():
                c = c1 * c2
                for basis, r in q_reduce(p1 + p2).items():
                    v = out.terms.get(basis, Fraction(0)) + c * r
                    if v:
                        out.terms[basis] = v
                    elif basis in out.terms:
                        del out.terms[basis]
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / as_fraction(other))
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = QElement.one()
        for _ in range(e):
            out = out * self
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    __hash__ = None

    # -- structure -----------------------------------------------------------
    def weights(self) -> set[int]:
        return {sum(p) for p in self.terms}

    def max_weight(self) -> int:
        return max((sum(p) for p in self.terms), default=0)

    def coefficient(self, parts: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(parts), Fraction(0))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def to_x(self) -> SparsePoly:
        """Exact image in the odd coordinates x_k."""
        out = SparsePoly.zero(UX)
        for part, c in self.terms.items():
            term = SparsePoly.const(UX, c)
            for p in part:
                term = term * q_in_x(p)
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for part in sorted(self.terms, key=lambda p: (sum(p), p)):
            c = self.terms[part]
            mono = "*".join(f"q{p}" for p in part)
            if not part:
                body = str(c)
            elif c == 1:
                body = mono
            elif c == -1:
                body = f"-{mono}"
            else:
                body = f"{c}*{mono}"
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


# ----------------------------------------------------------------- coproduct

class QTensor:
    """Element of the tensor square, used for coproduct checks."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Partition, Partition], Fraction] | None = None):
        self.terms: dict[tuple[Partition, Partition], Fraction] = {}
        if terms:
            for k, c in terms.items():
                c = as_fraction(c)
                if c:
                    self.terms[k] = self.terms.get(k, Fraction(0)) + c
                    if not self.terms[k]:
                        del self.terms[k]

    @classmethod
    def of(cls, left: QElement, right: QElement) -> "QTensor":
        out = cls()
        for p1, c1 in left.terms.items():
            for p2, c2 in right.terms.items():
                out.terms[(p1, p2)] = c1 * c2
        return out

    def __add__(self, other: "QTensor") -> "QTensor":
        out = QTensor(self.terms)
        for k, c in other.terms.items():
            v = out.terms.get(k, Fraction(0)) + c
            if v:
                out.terms[k] = v
            elif k in out.terms:
                del out.terms[k]
        return out

    def __mul__(self, other: "QTensor") -> "QTensor":
        out = QTensor()
        for (l1, r1), c1 in self.terms.items():
            for (l2, r2), c2 in other.terms.items():
                piece = QTensor.of(QElement.monomial(l1 + l2),
                                   QElement.monomial(r1 + r2))
                for k, c in piece.terms.items():
                    v = out.terms.get(k, Fraction(0)) + c1 * c2 * c
                    if v:
                        out.terms[k] = v
                    elif k in out.terms:
                        del out.terms[k]
        return out

    def scale(self, c) -> "QTensor":
        c = as_fraction(c)
        return QTensor({k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, QTensor) and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        bits = [f"{c}*({QElement({l: 1})!r} (x) {QElement({r: 1})!r})"
                for (l, r), c in sorted(self.terms.items())]
        return " + ".join(bits) if bits else "0"


def coproduct(e: QElement) -> QTensor:
    """The coalgebra map determined by q_n -> sum_{j+l=n} q_j (x) q_l,
    extended multiplicatively."""
    out = QTensor()
    for part, c in e.terms.items():
        acc = QTensor.of(QElement.one(), QElement.one())
        for n in part:
            gen = QTensor()
            for j in range(n + 1):
                left = QElement.one() if j == 0 else QElement.monomial((j,))
                right = QElement.one() if j == n else QElement.monomial((n - j,))
                gen = gen + QTensor.of(left, right)
            acc = acc * gen
        out = out + acc.scale(c)
    return out


def counit(e: QElement) -> Fraction:
    return e.terms.get((), Fraction(0))


def antipode(e: QElement) -> QElement:
    """q_n -> (-1)^n q_n extended multiplicatively (the inverse series
    coefficientwise, since q(U)q(-U) = 1)."""
    out = QElement()
    for part, c in e.terms.items():
        sign = (-1) ** sum(part)
        v = out.terms.get(part, Fraction(0)) + sign * c
        if v:
            out.terms[part] = v
        elif part in out.terms:
            del out.terms[part]
    return out


# ------------------------------------------------- x-coordinate conversion

@lru_cache(maxsize=None)
def q_in_x(n: int) -> SparsePoly:
    """q_n written exactly in the odd coordinates x_k."""
    if n < 0:
        raise DomainError("negative generating-series index")
    logq = TruncatedSeries.univariate(
        "U",
        {2 * k + 1: Fraction(2, 2 * k + 1) * SparsePoly.gen(UX, k)
         for k in range(n // 2 + 1)},
        n)
    q_series = logq.exp()
    c = q_series.coefficient(n)
    return c if isinstance(c, SparsePoly) else SparsePoly.const(UX, c)


@lru_cache(maxsize=None)
def x_in_q(k: int) -> QElement:
    """x_k as an element of the algebra: (2k+1)/2 times the odd-degree
    coefficient of log q(U)."""
    if k < 0:
        raise DomainError("x-index must be >= 0")
    order = 2 * k + 1
    qs = TruncatedSeries.univariate(
        "U",
        {0: QElement.one(), **{n: QElement.gen(n) for n in range(1, order + 1)}},
        order)
    c = qs.log().coefficient(order)
    return Fraction(2 * k + 1, 2) * c


def log_q_coefficient(n: int) -> QElement:
    """[U^n] log q(U); even n reduce to 0 in the algebra."""
    qs = TruncatedSeries.univariate(
        "U",
        {0: QElement.one(), **{m: QElement.gen(m) for m in range(1, n + 1)}},
        n)
    c = qs.log().coefficient(n)
    return c if isinstance(c, QElement) else QElement.zero()


def xpoly_to_q(p: SparsePoly) -> QElement:
    """Exact preimage of a polynomial in the x_k (no negative powers)."""
    if p.universe != UX:
        raise IncompatibleOperands("expected a polynomial in the x-universe")
    out = QElement.zero()
    for mono, c in p.terms.items():
        term = QElement({(): as_fraction(c)})
        for k, e in mono:
            if e < 0:
                raise DomainError("negative x-powers have no polynomial preimage")
            term = term * (x_in_q(k) ** e)
        out = out + term
    return out


# ------------------------------------------------------------ inner product

def inner_x(p1: SparsePoly, p2: SparsePoly) -> Fraction:
    """Inner product in x-coordinates: monomials are orthogonal with
    <x^alpha, x^alpha> = prod_k ((2k+1)/2)^(alpha_k) alpha_k!."""
    if p1.universe != UX or p2.universe != UX:
        raise IncompatibleOperands("inner product lives in the x-universe")
    total = Fraction(0)
    for mono, c1 in p1.terms.items():
        c2 = p2.terms.get(mono)
        if not c2:
            continue
        norm = Fraction(1)
        for k, e in mono:
            if e < 0:
                raise DomainError("inner product undefined on Laurent part")
            for j in range(1, e + 1):
                norm *= Fraction(2 * k + 1, 2) * j
        total += as_fraction(c1) * as_fraction(c2) * norm
    return total


def inner(a: QElement, b: QElement) -> Fraction:
    return inner_x(a.to_x(), b.to_x())


# -------------------------------------------------------- classical family

def two_row(r: int, s: int) -> QElement:
    """The orthogonal family member for a two-row strict partition (r, s):
    q_r q_s + 2 sum_{i=1}^{s} (-1)^i q_(r+i) q_(s-i)."""
    if not (r > s >= 1):
        raise DomainError(f"need r > s >= 1, got ({r}, {s})")
    out = QElement.monomial((r, s))
    for i in range(1, s + 1):
        parts = (r + i,) if i == s else (r + i, s - i)
        out = out + QElement.monomial(parts, 2 * (-1) ** i)
    return out


def _pfaffian(entry, items: tuple[int, ...]) -> QElement:
    if not items:
        return QElement.one()
    head, rest = items[0], items[1:]
    out = QElement.zero()
    for pos, j in enumerate(rest):
        sign = (-1) ** pos
        sub = rest[:pos] + rest[pos + 1:]
        out = out + sign * entry(head, j) * _pfaffian(entry, sub)
    return out


def classical_q(lam: Iterable[int]) -> QElement:
    """The classical orthogonal basis element for a strict partition,
    assembled from two-row members by a Pfaffian (odd lengths are padded
    with a zero part, contributing plain generators)."""
    lam = tuple(lam)
    if not is_strict(lam) or any(p < 1 for p in lam):
        raise DomainError(f"{lam} is not a strict partition")
    n = len(lam)
    if n == 0:
        return QElement.one()
    if n == 1:
        return QElement.gen(lam[0])
    if n == 2:
        return two_row(*lam)
    padded = lam + ((0,) if n % 2 else ())

    def entry(i: int, j: int) -> QElement:
        a, b = padded[i], padded[j]
        if b == 0:
            return QElement.gen(a)
        return two_row(a, b)

    return _pfaffian(entry, tuple(range(len(padded))))


def strict_partitions(weight: int, max_part: int | None = None):
    """Strict partitions of a given weight, lexicographically descending."""
    if max_part is None:
        max_part = weight

    def rec(w: int, cap: int):
        if w == 0:
            yield ()
            return
        for head in range(min(w, cap), 0, -1):
            for tail in rec(w - head, head - 1):
                yield (head,) + tail

    yield from rec(weight, max_part)


# ----------------------------------------- eigenvalue specialization lane

def eigen_universe(n: int):
    names = [f"a{i}" for i in range(1, n + 1)]
    return symbol_universe(f"eig{n}", names, invertible=names), names


def hl_q_series(n_eigs: int, t, order: int) -> TruncatedSeries:
    """Generating series prod_i (1 - a_i^-1 t U) / (1 - a_i^-1 U) as a
    truncated series in U with Laurent-polynomial coefficients in the a_i.

    ``t`` may be any exact scalar (Fraction, int, CycloRational)."""
    U, names = eigen_universe(n_eigs)
    num = TruncatedSeries.one(("U",), order)
    den = TruncatedSeries.one(("U",), order)
    for name in names:
        ai = SparsePoly.gen(U, name, -1)
        num = num * TruncatedSeries.univariate("U", {0: 1, 1: -(ai * t)}, order)
        den = den * TruncatedSeries.univariate("U", {0: 1, 1: -ai}, order)
    return num * den.inverse()


def hl_odd_power_sums(n_eigs: int, kmax: int) -> dict[int, SparsePoly]:
    """The specialization of the odd coordinates at t = -1:
    x_k -> sum_i a_i^-(2k+1)."""
    U, names = eigen_universe(n_eigs)
    out = {}
    for k in range(kmax + 1):
        s = SparsePoly.zero(U)
        for name in names:
            s = s + SparsePoly.gen(U, name, -(2 * k + 1))
        out[k] = s
    return out


def lambda_duality_check(n_eigs: int, t) -> dict:
    """Check the inversion symmetry of the generating series: with
    N1/D1 = series at (eigenvalues, t) and N2/D2 the same at
    (inverse eigenvalues, 1/t) evaluated at 1/U, verify the exact Laurent
    identity N1 * D2 == t^n * N2 * D1.  The symmetry is strict (factor 1)
    exactly when t^n == 1."""
    if isinstance(t, (int, Fraction)):
        t = as_fraction(t)
        if t == 0:
            raise DomainError("t must be invertible")
        t_inv = 1 / t
    else:
        t_inv = t.inv()
    U, names = eigen_universe(n_eigs)
    # Every factor is an exact Laurent polynomial; declare windows wide
    # enough that the pessimistic product rule still covers degree n_eigs.
    order, low = 3 * n_eigs + 2, -(n_eigs + 1)

    def before(vals):
        out = TruncatedSeries.one(("U",), order)
        for v in vals:
            out = out * TruncatedSeries.univariate("U", {0: 1, 1: -v}, order)
        return out

    def after(vals):
        out = TruncatedSeries.univariate("U", {0: 1}, order, low)
        for v in vals:
            out = out * TruncatedSeries.univariate("U", {0: 1, -1: -v}, order, low)
        return out

    inv_eigs = [SparsePoly.gen(U, n, -1) for n in names]
    eigs = [SparsePoly.gen(U, n) for n in names]
    n1 = before([ai * t for ai in inv_eigs])
    d1 = before(inv_eigs)
    n2 = after([a * t_inv for a in eigs])
    d2 = after(eigs)
    factor = t ** n_eigs
    lhs = n1 * d2
    rhs = (n2 * d1).scale(factor)
    return {
        "holds": lhs.agrees_with(rhs),
        "strict": factor == 1,
        "factor": factor,
    }


# ----------------------------------------------------------------- JSON

def qelement_to_obj(e: QElement) -> dict[str, str]:
    return {",".join(str(p) for p in part): str(c)
            for part, c in sorted(e.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))}


def qelement_from_obj(obj: Mapping[str, str]) -> QElement:
    terms = {}
    for key, val in obj.items():
        part = tuple(int(p) for p in key.split(",")) if key else ()
        terms[part] = Fraction(val)
    return QElement(terms)
