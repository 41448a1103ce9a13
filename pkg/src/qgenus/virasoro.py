"""Half-integer oscillator modes on the odd-coordinate Fock space, the
induced degree operators, and the intersection-number generating function
they annihilate.

The Fock space is the polynomial ring in the odd coordinates x_0, x_1, ...
(x_k has weight 2k+1).  The oscillator modes indexed by half-integers act
as

    alpha_(-(k+1/2)) = -2^(-1/2) * (multiplication by x_k),     k >= 0,
    alpha_(k+1/2)    = -(2k+1) * 2^(-1/2) * d/dx_k,             k >= 0,

so [alpha_r, alpha_s] = r * delta_(r+s,0).  Normal-ordering the quadratic
sums gives the degree operators (n > 0, p > 0):

    L_n    = 1/4 sum_(j+j'=n-1) (2j+1)(2j'+1) d_j d_j'
             + 1/2 sum_(m>=0) (2(m+n)+1) x_m d_(m+n)
    L_0    = sum_(m>=0) ((2m+1)/2) x_m d_m + 1/16
    L_(-p) = 1/4 sum_(j+j'=p-1) x_j x_j' + 1/2 sum_(m>=0) (2m+1) x_(p+m) d_m

with bracket [L_m, L_n] = (m-n) L_(m+n) + ((m^3-m)/12) delta_(m+n,0).

Conventions table (the one sign choice that matters):  the annihilators of
the intersection generating function are the *shifted* operators

    Ltilde_n = L_n + (1/2)(2n+3) d_(n+1),        n >= -1,

i.e. the function is rewritten in the variable x_1 - 1 (equivalently,
conjugate L_n by the translation x_1 -> x_1 + 1).  Substituting x_1 - 1
into the operator instead leaves a nonzero string residual (1/2) x_0^2 and
is wrong; the choice here reproduces the standard string and dilaton
equations in the t-coordinates t_k = -(2k-1)!! x_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Mapping

from .errors import DomainError, IncompatibleOperands, TruncationError
from .rings import SparsePoly, Sqrt2, UT, UX, dfact_odd, double_factorial

MultiIndex = tuple[int, ...]  # counts (K_0, K_1, ...), trailing zeros stripped


@dataclass(frozen=True)
class FockPoly:
    """A polynomial in the x_k together with the weight through which its
    coefficients are exact."""

    poly: SparsePoly
    trusted: int

    def __post_init__(self):
        if self.poly.universe != UX:
            raise IncompatibleOperands("Fock elements live in the x-universe")

    @classmethod
    def exact(cls, poly: SparsePoly, headroom: int = 0) -> "FockPoly":
        w = poly.max_weight()
        return cls(poly, (0 if w is None else w) + headroom)

    def __add__(self, other: "FockPoly") -> "FockPoly":
        t = min(self.trusted, other.trusted)
        return FockPoly((self.poly + other.poly).weight_truncate(t), t)

    def __sub__(self, other: "FockPoly") -> "FockPoly":
        return self + other.scale(-1)

    def scale(self, c) -> "FockPoly":
        return FockPoly(self.poly * c, self.trusted)

    def through(self, w: int) -> SparsePoly:
        if w > self.trusted:
            raise DomainError(
                f"weight {w} beyond trusted window {self.trusted}")
        return self.poly.weight_truncate(w)

    def is_zero_through(self, w: int) -> bool:
        return not self.through(w)


def alpha_apply(half: int, fock: FockPoly) -> FockPoly:
    """Apply one oscillator mode; ``half`` is twice the half-integer index
    (so it must be odd; -3 means the mode indexed -3/2)."""
    if half % 2 == 0:
        raise DomainError("oscillator modes carry half-integer indices")
    k = (abs(half) - 1) // 2
    if half < 0:
        out = SparsePoly.gen(UX, k) * fock.poly * Sqrt2(0, Fraction(-1, 2))
        return FockPoly(out, fock.trusted + 2 * k + 1)
    out = fock.poly.differentiate(k) * Sqrt2(0, -Fraction(2 * k + 1, 2))
    return FockPoly(out, fock.trusted - (2 * k + 1))


def l_apply(n: int, fock: FockPoly, shifted: bool = False) -> FockPoly:
    """Apply the degree operator L_n (or its shifted version, n >= -1)."""
    p = fock.poly
    out = SparsePoly.zero(UX)
    ks = sorted(p.gens())
    if n > 0:
        for j in range(n):
            jp = n - 1 - j
            d2 = p.differentiate(j).differentiate(jp)
            if d2:
                out = out + Fraction((2 * j + 1) * (2 * jp + 1), 4) * d2
        for k in ks:
            if k >= n:
                out = out + (Fraction(2 * k + 1, 2)
                             * SparsePoly.gen(UX, k - n) * p.differentiate(k))
    elif n == 0:
        for k in ks:
            out = out + Fraction(2 * k + 1, 2) * SparsePoly.gen(UX, k) * p.differentiate(k)
        out = out + Fraction(1, 16) * p
    else:
        pp = -n
        quad = SparsePoly.zero(UX)
        for j in range(pp):
            quad = quad + SparsePoly.gen(UX, j) * SparsePoly.gen(UX, pp - 1 - j)
        out = out + Fraction(1, 4) * quad * p
        for k in ks:
            out = out + (Fraction(2 * k + 1, 2)
                         * SparsePoly.gen(UX, pp + k) * p.differentiate(k))
    trusted = fock.trusted - 2 * n
    if shifted:
        if n < -1:
            raise DomainError("shifted operators exist only for n >= -1")
        out = out + Fraction(2 * n + 3, 2) * p.differentiate(n + 1)
        trusted -= 3
    return FockPoly(out.weight_truncate(trusted), trusted)


def l_bracket_residual(m: int, n: int, fock: FockPoly,
                       shifted: bool = False) -> FockPoly:
    """[L_m, L_n] f - ((m-n) L_(m+n) + ((m^3-m)/12) delta_(m+n,0)) f,
    compared on the common trusted window (zero iff the bracket holds)."""
    ab = l_apply(m, l_apply(n, fock, shifted), shifted)
    ba = l_apply(n, l_apply(m, fock, shifted), shifted)
    rhs = l_apply(m + n, fock, shifted).scale(m - n)
    if m + n == 0:
        rhs = rhs + fock.scale(Fraction(m ** 3 - m, 12))
    return (ab - ba) - rhs


# ------------------------------------------------------- coordinate change

def t_to_x(poly: SparsePoly) -> SparsePoly:
    """Correlator coordinates to odd coordinates: t_k -> -(2k-1)!! x_k."""
    if poly.universe != UT:
        raise IncompatibleOperands("expected the t-universe")
    mapping = {k: -dfact_odd(k) * SparsePoly.gen(UX, k) for k in poly.gens()}
    if not mapping:
        return SparsePoly.const(UX, poly.constant_term())
    return poly.substitute(mapping, universe=UX)


def x_to_t(poly: SparsePoly) -> SparsePoly:
    """Inverse coordinate change: x_k -> -t_k / (2k-1)!!."""
    if poly.universe != UX:
        raise IncompatibleOperands("expected the x-universe")
    mapping = {k: SparsePoly.gen(UT, k) * Fraction(-1, dfact_odd(k))
               for k in poly.gens()}
    if not mapping:
        return SparsePoly.const(UT, poly.constant_term())
    return poly.substitute(mapping, universe=UT)


# ------------------------------------------------------ intersection table

def index_stats(K: MultiIndex) -> tuple[int, int]:
    """(number of insertions n, total degree s)."""
    return sum(K), sum(d * c for d, c in enumerate(K))


def canon_index(K: Iterable[int]) -> MultiIndex:
    K = tuple(K)
    if any(c < 0 for c in K):
        raise DomainError(f"negative multiplicity in {K}")
    while K and K[-1] == 0:
        K = K[:-1]
    return K


def genus_of(K: Iterable[int]) -> int | None:
    """The genus forced by the dimension constraint, or None when no
    non-negative integer genus fits (such indices are not entries)."""
    K = canon_index(K)
    n, s = index_stats(K)
    if n < 1:
        return None
    g3 = s - n + 3
    if g3 < 0 or g3 % 3:
        return None
    return g3 // 3


def counts_from_degrees(ds: Iterable[int]) -> MultiIndex:
    ds = list(ds)
    if any(d < 0 for d in ds):
        raise DomainError("insertion degrees must be >= 0")
    K = [0] * (max(ds) + 1 if ds else 0)
    for d in ds:
        K[d] += 1
    return canon_index(K)


def _bump(K: MultiIndex, d: int, by: int = 1) -> MultiIndex:
    lst = list(K) + [0] * max(0, d + 1 - len(K))
    lst[d] += by
    return canon_index(lst)


class IntersectionTable:
    """Closed intersection-number table, built degree by degree from the
    annihilation constraints of the shifted degree operators.

    The constraint indexed nc >= -1 expresses the entry for K + e_(nc+1) in
    terms of entries whose total degree is strictly smaller, so filling the
    table in order of total degree needs no seed beyond the two boundary
    contributions the nc = -1 and nc = 0 constraints carry themselves.
    """

    def __init__(self):
        self.values: dict[MultiIndex, Fraction] = {}
        self.method: dict[MultiIndex, str] = {}
        self.complete_through = -1

    # -- lookups -----------------------------------------------------------
    def _v(self, K: Iterable[int]) -> Fraction:
        K = canon_index(K)
        if genus_of(K) is None:
            return Fraction(0)
        try:
            return self.values[K]
        except KeyError:
            raise TruncationError(
                f"table incomplete: entry {K} not built yet") from None

    def value(self, K: Iterable[int]) -> Fraction:
        K = canon_index(K)
        if genus_of(K) is None:
            raise DomainError(
                f"{K} violates the dimension constraint (no valid genus)")
        _, s = index_stats(K)
        if s > self.complete_through:
            raise TruncationError(
                f"table built through degree {self.complete_through}, "
                f"entry {K} has degree {s}")
        return self.values[K]

    def correlator(self, degrees: Iterable[int]) -> Fraction:
        return self.value(counts_from_degrees(degrees))

    def entries(self):
        return self.values.items()

    # -- construction --------------------------------------------------------
    def build_through(self, s_max: int) -> "IntersectionTable":
        for s in range(self.complete_through + 1, s_max + 1):
            for K in _valid_indices_of_degree(s):
                self.values[K] = self._constraint_value(K)
            self.complete_through = s
        return self

    def _constraint_value(self, T: MultiIndex) -> Fraction:
        d = max((i for i, c in enumerate(T) if c and i >= 1), default=0)
        if d == 0:
            nc = -1
            base = _bump(T, 0, -1)
        else:
            nc = d - 1
            base = _bump(T, d, -1)
        self.method[T] = f"constraint nc={nc}"
        total = Fraction(0)
        # transport sum: one insertion moves up by nc
        for m, cnt in enumerate(base):
            if cnt and m + nc >= 0:
                child = _bump(_bump(base, m, -1), m + nc)
                total += (cnt
                          * Fraction(double_factorial(2 * (m + nc) + 1),
                                     double_factorial(2 * m - 1))
                          * self._v(child))
        # quadratic part: connected + all disconnected splittings
        for j in range(max(nc, 0)):
            jp = nc - 1 - j
            w = Fraction(double_factorial(2 * j + 1)
                         * double_factorial(2 * jp + 1), 2)
            contrib = self._v(_bump(_bump(base, j), jp))
            for A in _splittings(base):
                B = tuple(b - a for a, b in zip(A, base))
                mult = 1
                for a, b in zip(A, base):
                    mult *= comb(b, a)
                va = self._v(_bump(A, j))
                if va:
                    vb = self._v(_bump(canon_index(B), jp))
                    if vb:
                        contrib += mult * va * vb
            total += w * contrib
        # boundary contributions carried by the lowest two constraints
        if nc == -1 and base == (2,):
            total += 1
        if nc == 0 and base == ():
            total += Fraction(1, 8)
        return total / double_factorial(2 * nc + 3)

    # -- serialization -------------------------------------------------------
    def to_obj(self) -> dict:
        return {
            "format": "intersection-table/1",
            "complete_through": self.complete_through,
            "entries": {
                ",".join(str(c) for c in K): str(v)
                for K, v in sorted(self.values.items())
            },
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "IntersectionTable":
        if obj.get("format") != "intersection-table/1":
            raise DomainError("unrecognized table format")
        out = cls()
        out.complete_through = int(obj["complete_through"])
        for key, val in obj["entries"].items():
            K = canon_index(int(c) for c in key.split(",")) if key else ()
            out.values[K] = Fraction(val)
            out.method[K] = "loaded"
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_obj(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "IntersectionTable":
        return cls.from_obj(json.loads(text))


def _valid_indices_of_degree(s: int):
    """All multi-indices satisfying the dimension constraint with total
    degree s, in a deterministic order."""
    out = []
    g = 0
    while True:
        n = s - 3 * g + 3
        if n < 1:
            break
        for parts in _partitions_at_most(s, n):
            K = [0] * (max(parts) + 1 if parts else 1)
            for p in parts:
                K[p] += 1
            K[0] += n - len(parts)
            out.append(canon_index(K))
        g += 1
    return out


def _partitions_at_most(s: int, n_parts: int):
    """Partitions of s into at most n_parts parts (parts >= 1)."""
    def rec(rem, cap, slots):
        if rem == 0:
            yield ()
            return
        if slots == 0:
            return
        for head in range(min(rem, cap), 0, -1):
            for tail in rec(rem - head, head, slots - 1):
                yield (head,) + tail
    yield from rec(s, s, n_parts)


def _splittings(K: MultiIndex):
    """All componentwise splittings A <= K."""
    if not K:
        yield ()
        return
    for head in range(K[0] + 1):
        for tail in _splittings(K[1:]):
            yield (head,) + tail


def string_oracle(table: IntersectionTable, K: Iterable[int]) -> Fraction:
    """Independent route to an entry with K_0 >= 1 (other than the
    3-point base): remove one degree-0 insertion and lower one other
    insertion by one, summing over choices."""
    K = canon_index(K)
    if not K or K[0] < 1:
        raise DomainError("needs a degree-0 insertion")
    if K == (3,):
        raise DomainError("the 3-point base is not reachable this way")
    base = _bump(K, 0, -1)
    total = Fraction(0)
    for k, cnt in enumerate(base):
        if k >= 1 and cnt:
            total += cnt * table._v(_bump(_bump(base, k, -1), k - 1))
    return total


def genus_zero_closed_form(K: Iterable[int]) -> Fraction:
    """(n-3)! / prod(d!) for genus-0 entries."""
    K = canon_index(K)
    if genus_of(K) != 0:
        raise DomainError(f"{K} is not a genus-0 entry")
    n, _ = index_stats(K)
    denom = 1
    for d, c in enumerate(K):
        denom *= factorial(d) ** c
    return Fraction(factorial(n - 3), denom)


# -------------------------------------------------- generating function

def correlator_weight(K: MultiIndex) -> int:
    """x-weight of the monomial an entry contributes: sum K_d (2d+1)."""
    return sum(c * (2 * d + 1) for d, c in enumerate(K))


def required_degree(weight: int) -> int:
    """Table degree needed so every entry of x-weight <= weight exists."""
    return max((weight - 1) // 2, 0)


def free_energy(weight: int, table: IntersectionTable | None = None) -> FockPoly:
    """The generating function of the table in the odd coordinates,
    complete through the given x-weight: each entry K contributes
    value(K) * prod_d (-(2d-1)!! x_d)^(K_d) / K_d!."""
    need = required_degree(weight)
    if table is None:
        table = IntersectionTable().build_through(need)
    elif table.complete_through < need:
        raise TruncationError(
            f"need table degree {need}, have {table.complete_through}")
    F = SparsePoly.zero(UX)
    for K, v in table.entries():
        if correlator_weight(K) > weight:
            continue
        coeff = v
        powers = {}
        for d, c in enumerate(K):
            if c:
                coeff *= Fraction((-dfact_odd(d)) ** c, factorial(c))
                powers[d] = c
        F = F + SparsePoly.monomial(UX, powers, coeff)
    return FockPoly(F, weight)


def tau_series(weight: int, table: IntersectionTable | None = None) -> FockPoly:
    """exp of the generating function, truncated at the given x-weight."""
    F = free_energy(weight, table).poly
    acc = SparsePoly.const(UX, 1)
    power = SparsePoly.const(UX, 1)
    k = 1
    while True:
        power = (power * F).weight_truncate(weight)
        if not power:
            break
        acc = acc + power * Fraction(1, factorial(k))
        k += 1
    return FockPoly(acc, weight)


@dataclass(frozen=True)
class AnnihilationReport:
    n: int
    weight: int
    ok: bool
    residual: SparsePoly

    def __repr__(self):
        status = "annihilated" if self.ok else f"RESIDUAL {self.residual}"
        return (f"shifted operator n={self.n} on tau through weight "
                f"{self.weight}: {status}")


def annihilation_check(n: int, weight: int,
                       table: IntersectionTable | None = None) -> AnnihilationReport:
    """Verify that the shifted operator kills the exponential of the
    generating function through the requested x-weight.  The tau series is
    materialized with exactly the extra headroom the operator consumes."""
    if n < -1:
        raise DomainError("shifted operators exist only for n >= -1")
    tau = tau_series(weight + 2 * n + 3, table)
    res = l_apply(n, tau, shifted=True)
    if res.trusted < weight:
        raise TruncationError("window bookkeeping error")  # pragma: no cover
    return AnnihilationReport(n, weight, res.is_zero_through(weight),
                              res.through(weight))
