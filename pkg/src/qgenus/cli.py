"""Command-line surface over the whole package.

Every computation the library exposes is reachable here, with output in
three renderings (``pretty`` text, sorted-key JSON, CSV where the data is
tabular).  Output on stdout is a pure function of the invocation: no
timestamps, no environment echoes — status notes and warnings go to
stderr.  Exact rationals are serialized as ``p/q`` strings in JSON; CSV
adds decimal approximations next to them.

Exit codes: 0 success, 1 a requested check failed, 2 usage error
(including unparseable expressions and domain violations), 3 internal
error.

Expression mini-grammar (``qreduce``, ``inner``, ``voa y-check``)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := unary ('^' integer)?
    unary  := '-' unary | '(' expr ')' | rational | symbol

Rational literals are ``7`` or ``7/3``; symbols are ``q1, q2, ...`` and
``x0, x1, ...`` for the square-free commands, ``p1, p2, ...`` (power
sums) and ``h1, h2, ...`` (complete homogeneous) for the vertex-operator
commands.  Multiplication is always explicit.  Partitions are
comma-separated part lists like ``"3,2,1"``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from .analytic import epsilon_rows, ml_asymptotic, ml_exp, write_epsilon_csv
from .errors import DomainError, IncompatibleOperands, TruncationError
from .grouplaw import GroupLaw, genus_exponential, projective_image, to_q_over_q1
from .qfunctions import QElement, classical_q, inner, is_strict, x_in_q
from .rings import SparsePoly, UPS, UX, dfact_odd
from .series import TruncatedSeries
from .virasoro import (FockPoly, IntersectionTable, correlator_weight,
                       genus_of, index_stats, l_bracket_residual,
                       required_degree)
from .witt import (LatticeFockElement, WittVector, Y_multiplicativity_check,
                   closure_report, ghost, hl_q_gen, lattice_action_obj,
                   lattice_from_json, lattice_grading_audit, lattice_universe,
                   q_subfunctor_check, vertex_Y_lattice, vertex_Y_powersum,
                   vertex_table_obj, witt_mul)

# Desk-scale ceilings: everything below finishes in seconds on a laptop;
# anything above deserves a batch job, not a CLI call.
_MAX_ORDER = 32          # Witt truncations, integrality windows
_MAX_LAW_ORDER = 10      # trivariate associativity grows fast
_MAX_TABLE_WEIGHT = 13   # intersection generating-function weight
_MAX_FOCK_WEIGHT = 10    # virasoro-check monomial weight
_MAX_MODE = 6            # virasoro mode indices
_MAX_VOA_CAP = 12        # vertex-operator weight caps
_MAX_POINTS = 10_000     # epsilon-table rows


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation, fully determined: identical configs must produce
    byte-identical stdout."""

    subcommand: str
    orders: tuple[int, ...] = ()
    primes: tuple[int, ...] = ()
    cache_path: Path | None = None
    fmt: str = "pretty"
    verbosity: int = 0

    def __post_init__(self):
        if self.fmt not in ("pretty", "json", "csv"):
            raise DomainError(f"unknown output format {self.fmt!r}")
        for o in self.orders:
            if not 0 <= o <= 64:
                raise DomainError(
                    f"order {o} is outside the desk-scale window [0, 64]")
        for p in self.primes:
            if p < 2:
                raise DomainError(f"{p} is not a valid prime")


def _config(obj: dict, subcommand: str, *, orders=(), primes=()) -> RunConfig:
    return RunConfig(subcommand=subcommand, orders=tuple(orders),
                     primes=tuple(primes), cache_path=obj.get("cache_path"),
                     fmt=obj["fmt"], verbosity=obj["verbosity"])


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise click.UsageError(msg)


# ---------------------------------------------------------------------------
# expression mini-grammar
# ---------------------------------------------------------------------------

class ExprError(Exception):
    def __init__(self, pos: int, msg: str):
        super().__init__(msg)
        self.pos = pos
        self.msg = msg


_NUM = re.compile(r"\d+(?:/\d+)?")
_NAME = re.compile(r"[A-Za-z]+\d*")


def _tokenize(src: str):
    toks = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*^()":
            toks.append(("op", ch, i))
            i += 1
            continue
        m = _NUM.match(src, i)
        if m:
            toks.append(("num", m.group(), i))
            i = m.end()
            continue
        m = _NAME.match(src, i)
        if m:
            toks.append(("name", m.group(), i))
            i = m.end()
            continue
        raise ExprError(i, f"unexpected character {ch!r}")
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    """Recursive descent over the grammar in the module docstring; the
    element type is fixed by the two callbacks."""

    def __init__(self, src: str, const, symbol):
        self.toks = _tokenize(src)
        self.k = 0
        self.const = const
        self.symbol = symbol

    def _peek(self):
        return self.toks[self.k]

    def _take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def parse(self):
        e = self._expr()
        kind, txt, pos = self._peek()
        if kind != "end":
            raise ExprError(pos, f"unexpected {txt!r} after the expression")
        return e

    def _expr(self):
        t = self._term()
        while self._peek()[:2] in (("op", "+"), ("op", "-")):
            op = self._take()[1]
            u = self._term()
            t = t + u if op == "+" else t - u
        return t

    def _term(self):
        f = self._factor()
        while self._peek()[:2] == ("op", "*"):
            self._take()
            f = f * self._factor()
        return f

    def _factor(self):
        base = self._unary()
        if self._peek()[:2] == ("op", "^"):
            self._take()
            kind, txt, pos = self._take()
            if kind != "num" or "/" in txt:
                raise ExprError(pos, "exponent must be a nonnegative integer")
            base = base ** int(txt)
        return base

    def _unary(self):
        kind, txt, pos = self._peek()
        if (kind, txt) == ("op", "-"):
            self._take()
            return -self._unary()
        if (kind, txt) == ("op", "("):
            self._take()
            e = self._expr()
            kind, txt, pos = self._take()
            if (kind, txt) != ("op", ")"):
                raise ExprError(pos, "expected ')'")
            return e
        if kind == "num":
            self._take()
            try:
                return self.const(Fraction(txt))
            except ZeroDivisionError:
                raise ExprError(pos, "zero denominator") from None
        if kind == "name":
            self._take()
            return self.symbol(txt, pos)
        raise ExprError(pos, f"expected a value, found {txt!r}"
                        if txt else "unexpected end of expression")


def _q_symbol(name: str, pos: int) -> QElement:
    m = re.fullmatch(r"q(\d+)", name)
    if m:
        k = int(m.group(1))
        if k > 64:
            raise ExprError(pos, f"generator index {k} beyond desk scale")
        return QElement.one() if k == 0 else QElement.gen(k)
    m = re.fullmatch(r"x(\d+)", name)
    if m:
        k = int(m.group(1))
        if k > 32:
            raise ExprError(pos, f"generator index {k} beyond desk scale")
        return x_in_q(k)
    raise ExprError(pos, f"unknown symbol {name!r} (expected q<k> or x<k>)")


def _p_symbol(name: str, pos: int) -> SparsePoly:
    m = re.fullmatch(r"p([1-9]\d*)", name)
    if m:
        k = int(m.group(1))
        if k > _MAX_VOA_CAP:
            raise ExprError(pos, f"power-sum index {k} beyond desk scale")
        return SparsePoly.gen(UPS, k)
    m = re.fullmatch(r"h([1-9]\d*)", name)
    if m:
        k = int(m.group(1))
        if k > _MAX_VOA_CAP:
            raise ExprError(pos, f"homogeneous index {k} beyond desk scale")
        c = hl_q_gen(0, k).series.coefficient(k)
        return c if isinstance(c, SparsePoly) else SparsePoly.const(UPS, c)
    raise ExprError(pos, f"unknown symbol {name!r} (expected p<k> or h<k>)")


def _parse_expr(src: str, const, symbol, what: str):
    try:
        return _Parser(src, const, symbol).parse()
    except ExprError as e:
        raise click.UsageError(
            f"parse error in {what} at position {e.pos}: {e.msg}") from e


def parse_q_expr(src: str, what: str = "expression") -> QElement:
    return _parse_expr(src, lambda c: QElement.monomial((), c),
                       _q_symbol, what)


def parse_p_expr(src: str, what: str = "expression") -> SparsePoly:
    return _parse_expr(src, lambda c: SparsePoly.const(UPS, c),
                       _p_symbol, what)


def _parse_partition(src: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p.strip()) for p in src.split(","))
    except ValueError:
        raise click.UsageError(
            f"partition {src!r} is not a comma-separated integer list"
        ) from None
    if not parts or any(p < 1 for p in parts):
        raise click.UsageError("partition parts must be positive integers")
    parts = tuple(sorted(parts, reverse=True))
    if not is_strict(parts):
        raise click.UsageError(
            f"partition {src!r} is not strict (parts must be distinct)")
    return parts


def _parse_fraction_list(src: str, what: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(p.strip()) for p in src.split(","))
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(
            f"{what} must be a comma-separated list of rationals "
            f"(got {src!r})") from None


def _parse_int_tuple(src: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(p.strip()) for p in src.split(","))
    except ValueError:
        raise click.UsageError(
            f"{what} must be a comma-separated integer list "
            f"(got {src!r})") from None


def _parse_scalar(src: str, what: str):
    """A rational ('1/2') or decimal ('0.5') scalar."""
    try:
        return Fraction(src)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(src)
    except ValueError:
        raise click.UsageError(f"{what} must be a number, got {src!r}") from None


def _parse_complex(src: str):
    """A real or complex number; the imaginary unit is written ``i``
    (``10i``, ``1+2i``) or ``j``."""
    text = src.strip().replace(" ", "").replace("i", "j")
    try:
        z = complex(text)
    except ValueError:
        raise click.UsageError(f"cannot parse {src!r} as a number") from None
    if z != z or abs(z.real) == float("inf") or abs(z.imag) == float("inf"):
        raise click.UsageError("z must be finite")
    return z.real if z.imag == 0.0 else z


# ---------------------------------------------------------------------------
# renderers and emission
# ---------------------------------------------------------------------------

def _render_series(ts: TruncatedSeries) -> str:
    """One-line rendering of a scalar univariate series with an O-tail."""
    var = ts.vars[0]
    bits = []
    for (k,), c in sorted(ts.coeffs.items()):
        if not c:
            continue
        mono = "1" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if k == 0:
            bits.append(str(c))
        elif c == 1:
            bits.append(mono)
        elif c == -1:
            bits.append(f"-{mono}")
        else:
            bits.append(f"{c}*{mono}")
    out = ""
    for b in bits:
        if not out:
            out = b
        elif b.startswith("-"):
            out += f" - {b[1:]}"
        else:
            out += f" + {b}"
    tail = f"O({var}^{ts.order + 1})"
    return f"{out} + {tail}" if out else tail


def _jsonify_value(v):
    """Floats stay numbers; complex values become repr strings."""
    return v if isinstance(v, float) else repr(v)


def _emit_csv(header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    click.echo(buf.getvalue(), nl=False)


def _emit(cfg: RunConfig, *, pretty, obj, rows=None) -> None:
    if cfg.fmt == "json":
        click.echo(json.dumps(obj, indent=2, sort_keys=True))
    elif cfg.fmt == "csv":
        if rows is None:
            raise click.UsageError(
                f"'{cfg.subcommand}' has no CSV rendering; "
                "use --format pretty or json")
        _emit_csv(*rows)
    else:
        for line in pretty:
            click.echo(line)


# ---------------------------------------------------------------------------
# click plumbing
# ---------------------------------------------------------------------------

class _InternalError(click.ClickException):
    exit_code = 3


class _Cli(click.Group):
    """Translates library errors into the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (DomainError, TruncationError, IncompatibleOperands) as e:
            raise click.UsageError(str(e)) from e
        except click.ClickException:
            raise
        except (click.exceptions.Exit, click.exceptions.Abort):
            raise
        except OSError as e:
            raise click.UsageError(str(e)) from e
        except Exception as e:  # anything else is a bug, not bad input
            raise _InternalError(
                f"internal error: {type(e).__name__}: {e}") from e


@click.group(cls=_Cli, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--format", "-f", "fmt",
              type=click.Choice(["pretty", "json", "csv"]), default="pretty",
              show_default=True, help="Output rendering for stdout.")
@click.option("--verbose", "-v", "verbosity", count=True,
              help="Add diagnostic notes on stderr.")
@click.option("--cache-path", type=click.Path(dir_okay=False, path_type=Path),
              default=None,
              help="Intersection-table cache file.  [default: "
                   "$QGENUS_CACHE_DIR/intersection.json or "
                   "~/.cache/qgenus/intersection.json]")
@click.pass_context
def cli(ctx, fmt, verbosity, cache_path):
    """Exact computations in the square-free symmetric-function algebra
    and its friends: Virasoro constraints, intersection-number tables,
    the odd formal group law, special-function evaluations, Witt vectors,
    and vertex-operator checks."""
    ctx.obj = {"fmt": fmt, "verbosity": verbosity, "cache_path": cache_path}


main = cli


# ---------------------------------------------------------------------------
# square-free algebra commands
# ---------------------------------------------------------------------------

@cli.command()
@click.argument("expr")
@click.pass_obj
def qreduce(obj, expr):
    """Normal form of EXPR in the square-free basis.

    Example: qreduce "q1^2" prints 2*q2.
    """
    cfg = _config(obj, "qreduce")
    e = parse_q_expr(expr)
    _emit(cfg,
          pretty=[repr(e), f"x-basis: {e.to_x()!r}"],
          obj={"q_basis": repr(e), "x_basis": repr(e.to_x())})


@cli.command()
@click.argument("partition")
@click.pass_obj
def qfunction(obj, partition):
    """The orthogonal basis element indexed by a strict PARTITION
    ("3,2,1"), expanded in the square-free generators."""
    cfg = _config(obj, "qfunction")
    lam = _parse_partition(partition)
    e = classical_q(lam)
    _emit(cfg,
          pretty=[repr(e), f"x-basis: {e.to_x()!r}"],
          obj={"partition": list(lam), "q_basis": repr(e),
               "x_basis": repr(e.to_x())})


@cli.command("inner")
@click.argument("left")
@click.argument("right")
@click.pass_obj
def inner_cmd(obj, left, right):
    """The canonical inner product of two expressions.

    Example: inner "q1" "q1" prints 2.
    """
    cfg = _config(obj, "inner")
    a = parse_q_expr(left, "LEFT")
    b = parse_q_expr(right, "RIGHT")
    v = inner(a, b)
    if cfg.verbosity:
        click.echo(f"x-basis: left = {a.to_x()!r}, right = {b.to_x()!r}",
                   err=True)
    _emit(cfg,
          pretty=[str(v)],
          obj={"value": str(v), "left_x": repr(a.to_x()),
               "right_x": repr(b.to_x())})


# ---------------------------------------------------------------------------
# intersection table and Virasoro bracket
# ---------------------------------------------------------------------------

def _default_cache_path() -> Path:
    root = os.environ.get("QGENUS_CACHE_DIR")
    base = Path(root).expanduser() if root else Path.home() / ".cache" / "qgenus"
    return base / "intersection.json"


def _load_table(path: Path) -> IntersectionTable:
    if path.exists():
        try:
            return IntersectionTable.loads(path.read_text())
        except (ValueError, KeyError, TypeError, DomainError) as e:
            click.echo(f"warning: cache {path} is unusable ({e}); "
                       "regenerating", err=True)
    return IntersectionTable()


def _save_table(path: Path, table: IntersectionTable) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name,
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(table.dumps())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tau_label(K: tuple[int, ...]) -> str:
    bits = [f"tau_{d}" + (f"^{c}" if c > 1 else "")
            for d, c in enumerate(K) if c]
    return "<" + " ".join(bits) + ">"


@cli.command()
@click.option("--max-weight", "max_weight", type=int, required=True,
              help="Emit every entry whose generating-function weight is "
                   "at most this.")
@click.option("--no-cache", is_flag=True,
              help="Compute fresh; do not read or write the cache file.")
@click.pass_obj
def intersection(obj, max_weight, no_cache):
    """Closed intersection-number table, built by the annihilation
    recursion and persisted to a versioned JSON cache (atomic writes; a
    corrupt or mismatched cache is regenerated with a warning)."""
    cfg = _config(obj, "intersection", orders=(max_weight,))
    _require(0 <= max_weight <= _MAX_TABLE_WEIGHT,
             f"--max-weight is capped at {_MAX_TABLE_WEIGHT} (desk scale)")
    need = required_degree(max_weight)
    path = cfg.cache_path or _default_cache_path()
    table = IntersectionTable() if no_cache else _load_table(path)
    if table.complete_through < need:
        table.build_through(need)
        if not no_cache:
            _save_table(path, table)
    if cfg.verbosity and not no_cache:
        click.echo(f"cache: {path} (complete through degree "
                   f"{table.complete_through})", err=True)
    chosen = [(K, v) for K, v in sorted(table.entries())
              if correlator_weight(K) <= max_weight]
    _emit(
        cfg,
        pretty=[f"{_tau_label(K)} = {v}" for K, v in chosen],
        obj={"format": "intersection-table/1", "max_weight": max_weight,
             "entries": {",".join(str(c) for c in K): str(v)
                         for K, v in chosen}},
        rows=(["index", "n", "genus", "degree", "weight", "value", "decimal"],
              [[",".join(str(c) for c in K), index_stats(K)[0], genus_of(K),
                index_stats(K)[1], correlator_weight(K), str(v),
                repr(float(v))] for K, v in chosen]))


def _x_monomials(bound: int):
    """Every monomial in the odd coordinates of weight <= bound, the
    constant included, keyed by smallest generator (no repeats)."""
    def rec(k, rem):
        yield {}
        kk = k
        while 2 * kk + 1 <= rem:
            for e in range(1, rem // (2 * kk + 1) + 1):
                for rest in rec(kk + 1, rem - e * (2 * kk + 1)):
                    d = {kk: e}
                    d.update(rest)
                    yield d
            kk += 1
    yield from rec(0, bound)


@cli.command("virasoro-check")
@click.option("--m", "m", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--max-weight", "max_weight", type=int, default=6,
              show_default=True,
              help="Check the bracket on every monomial up to this weight.")
@click.pass_obj
def virasoro_check(obj, m, n, max_weight):
    """Verify one bracket relation of the degree operators on the
    oscillator representation; prints the central term and exits
    nonzero if any monomial witnesses a failure."""
    cfg = _config(obj, "virasoro-check", orders=(max_weight,))
    _require(abs(m) <= _MAX_MODE and abs(n) <= _MAX_MODE,
             f"mode indices are capped at |m|, |n| <= {_MAX_MODE}")
    _require(0 <= max_weight <= _MAX_FOCK_WEIGHT,
             f"--max-weight is capped at {_MAX_FOCK_WEIGHT} (desk scale)")
    central = Fraction(m ** 3 - m, 12) if m + n == 0 else Fraction(0)
    checked = 0
    failures = []
    for powers in _x_monomials(max_weight):
        fock = FockPoly(SparsePoly.monomial(UX, powers), 99)
        res = l_bracket_residual(m, n, fock)
        checked += 1
        if not res.is_zero_through(res.trusted):
            failures.append(powers)
    ok = not failures
    _emit(cfg,
          pretty=[f"central term: {central}",
                  f"monomials checked: {checked} (weight <= {max_weight})",
                  f"bracket [L_{m}, L_{n}]: {'pass' if ok else 'FAIL'}"],
          obj={"m": m, "n": n, "central_term": str(central),
               "monomials_checked": checked, "max_weight": max_weight,
               "ok": ok})
    if not ok:
        sys.exit(1)


# ---------------------------------------------------------------------------
# genus / formal group law commands
# ---------------------------------------------------------------------------

def _cleared_coefficient(k: int):
    """The T^(k+1) exponential coefficient with the inverted generator
    cleared against the square-free basis."""
    return to_q_over_q1(dfact_odd(k) * SparsePoly.gen(UX, 0, -1)
                        * SparsePoly.gen(UX, k))


@cli.command()
@click.option("--cpn", type=int, default=None,
              help="Genus image of the degree-n projective space.")
@click.option("--integrality", type=int, default=None, metavar="N",
              help="Check integrality of the cleared exponential "
                   "coefficients through T^N.")
@click.option("--modp", type=int, default=None, metavar="P",
              help="Check the mod-P vanishing cutoff of the cleared "
                   "exponential coefficients.")
@click.pass_obj
def kw(obj, cpn, integrality, modp):
    """The genus attached to the square-free algebra: projective-space
    images, integrality, and mod-p vanishing of its exponential."""
    given = [x for x in (cpn, integrality, modp) if x is not None]
    _require(len(given) == 1,
             "pass exactly one of --cpn, --integrality, --modp")

    if cpn is not None:
        cfg = _config(obj, "kw", orders=(cpn,))
        _require(0 <= cpn <= 16, "--cpn is capped at 16 (desk scale)")
        p = projective_image(cpn)
        a, e = to_q_over_q1(p)
        qform = f"({e}) / q1^{a}" if a > 1 else (f"({e}) / q1" if a else str(e))
        _emit(cfg,
              pretty=[repr(p), f"q-basis: {qform}"],
              obj={"cpn": cpn, "x_basis": repr(p), "q_numerator": repr(e),
                   "q1_power": a})
        return

    if integrality is not None:
        cfg = _config(obj, "kw", orders=(integrality,))
        _require(2 <= integrality <= _MAX_ORDER,
                 f"--integrality is capped at {_MAX_ORDER}")
        bad = []
        for k in range(1, integrality):
            _, e = _cleared_coefficient(k)
            if not e.is_integral():
                bad.append(k + 1)
        ok = not bad
        _emit(cfg,
              pretty=[f"exponential coefficients through T^{integrality}: "
                      + ("all integral in the square-free basis" if ok else
                         f"NOT integral at T^{bad}")],
              obj={"through_order": integrality, "ok": ok,
                   "non_integral_orders": bad})
        if not ok:
            sys.exit(1)
        return

    cfg = _config(obj, "kw", primes=(modp,))
    _require(modp in (3, 5, 7, 11, 13),
             "--modp expects an odd prime up to 13")
    cutoff = (modp + 1) // 2
    lines = [f"mod-{modp} vanishing predicted from k >= {cutoff}"]
    mismatches = []
    rows = []
    for k in range(1, cutoff + 4):
        _, e = _cleared_coefficient(k)
        divisible = all(c.numerator % modp == 0 for c in e.terms.values())
        expected = k >= cutoff
        rows.append({"k": k, "divisible": divisible, "expected": expected})
        status = "vanishes" if divisible else "nonzero"
        lines.append(f"k = {k}: {status} mod {modp}")
        if divisible != expected:
            mismatches.append(k)
    ok = not mismatches
    lines.append(f"prediction: {'pass' if ok else 'FAIL'}")
    _emit(cfg, pretty=lines,
          obj={"p": modp, "cutoff": cutoff, "rows": rows, "ok": ok})
    if not ok:
        sys.exit(1)


@cli.command()
@click.option("--exp", "exp_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='JSON file {"order": N, "coefficients": {"1": "1", ...}} '
                   "giving the exponential's T-coefficients.")
@click.pass_obj
def fgl(obj, exp_file):
    """Check the formal-group-law axioms of a user-supplied exponential
    and print its logarithm; exits nonzero if any axiom fails."""
    cfg = _config(obj, "fgl")
    try:
        data = json.loads(exp_file.read_text())
        order = int(data["order"])
        coeffs = {int(k): Fraction(v)
                  for k, v in data["coefficients"].items()}
    except (ValueError, KeyError, TypeError, ZeroDivisionError) as e:
        raise click.UsageError(f"invalid exponential file: {e}") from e
    _require(1 <= order <= _MAX_LAW_ORDER,
             f"law order is capped at {_MAX_LAW_ORDER} (desk scale)")
    _require(all(1 <= k <= order for k in coeffs),
             "coefficient keys must be T-exponents in [1, order]")
    law = GroupLaw(TruncatedSeries.univariate("T", coeffs, order))
    axioms = {
        "unit": law.unit_residuals().is_zero(),
        "commutativity": law.commutativity_residual().is_zero(),
        "associativity": law.associativity_residual().is_zero(),
        "inverse": law.inverse_residual().is_zero(),
    }
    log = law.logarithm()
    ok = all(axioms.values())
    _emit(cfg,
          pretty=[f"order: {order}"]
          + [f"{name}: {'pass' if good else 'FAIL'}"
             for name, good in axioms.items()]
          + [f"logarithm: {_render_series(log)}"],
          obj={"order": order, "axioms": axioms,
               "logarithm": {str(k): str(log.coefficient(k))
                             for k in range(1, order + 1)
                             if log.coefficient(k)}})
    if not ok:
        sys.exit(1)


# ---------------------------------------------------------------------------
# analytic commands
# ---------------------------------------------------------------------------

@cli.command()
@click.option("--alpha", required=True, help="Index in (0, 2), e.g. 0.5.")
@click.option("--z", "z_str", required=True,
              help="Evaluation point; imaginary unit written i (e.g. 10i).")
@click.option("--compare-asymptotic", is_flag=True,
              help="Also evaluate the divergent tail and check agreement "
                   "within the two reported error budgets.")
@click.option("--n-terms", type=int, default=None,
              help="Fixed tail length (default: optimal truncation).")
@click.pass_obj
def ml(obj, alpha, z_str, compare_asymptotic, n_terms):
    """Evaluate the interpolating exponential at one point, optionally
    cross-checked against its asymptotic expansion."""
    cfg = _config(obj, "ml")
    a = _parse_scalar(alpha, "--alpha")
    z = _parse_complex(z_str)
    s = ml_exp(a, z)
    pretty = [f"series    : value={s.value!r} error={s.error!r} "
              f"terms={s.terms} method={s.method}"]
    obj_out = {"alpha": str(a), "z": repr(z),
               "series": {"value": _jsonify_value(s.value), "error": s.error,
                          "terms": s.terms, "method": s.method}}
    header = ["alpha", "z", "value", "error", "method", "terms"]
    row = [str(a), repr(z), repr(s.value), repr(s.error), s.method, s.terms]
    ok = True
    if compare_asymptotic:
        t = ml_asymptotic(a, z, n_terms)
        diff = abs(s.value - t.value)
        bound = s.error + t.error
        ok = diff <= bound
        pretty += [f"asymptotic: value={t.value!r} error={t.error!r} "
                   f"terms={t.terms} method={t.method}",
                   f"difference: {diff!r} bound: {bound!r} "
                   f"within bound: {'yes' if ok else 'NO'}"]
        obj_out["asymptotic"] = {"value": _jsonify_value(t.value),
                                 "error": t.error, "terms": t.terms,
                                 "method": t.method}
        obj_out["difference"] = diff
        obj_out["bound"] = bound
        obj_out["within_bound"] = ok
        header = ["alpha", "z", "series", "series_error", "asymptotic",
                  "asymptotic_error", "difference", "bound", "within"]
        row = [str(a), repr(z), repr(s.value), repr(s.error),
               repr(t.value), repr(t.error), repr(diff), repr(bound),
               "yes" if ok else "no"]
    _emit(cfg, pretty=pretty, obj=obj_out, rows=(header, [row]))
    if not ok:
        sys.exit(1)


@cli.command("epsilon-table")
@click.option("--x-min", type=float, default=1.0, show_default=True)
@click.option("--x-max", type=float, default=1e6, show_default=True)
@click.option("--points", type=int, default=25, show_default=True)
@click.option("--log/--linear", "log_spacing", default=True,
              help="Geometric or arithmetic grid spacing.  [default: log]")
@click.option("--output", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write to a file instead of stdout.")
@click.pass_obj
def epsilon_table(obj, x_min, x_max, points, log_spacing, output):
    """CSV table of the scaled-window integral: both evaluation lanes and
    the honest error bound at each grid point (for external plotters).
    This command always emits CSV, whatever --format says."""
    cfg = _config(obj, "epsilon-table")
    _require(2 <= points <= _MAX_POINTS,
             f"--points must be in [2, {_MAX_POINTS}]")
    _require(x_min < x_max, "--x-min must be below --x-max")
    if log_spacing:
        _require(x_min > 0, "log spacing needs --x-min > 0")
        ratio = x_max / x_min
        xs = [x_min * ratio ** (i / (points - 1)) for i in range(points)]
    else:
        step = (x_max - x_min) / (points - 1)
        xs = [x_min + i * step for i in range(points)]
    if output is None:
        buf = io.StringIO()
        write_epsilon_csv(buf, xs)
        click.echo(buf.getvalue(), nl=False)
    else:
        with open(output, "w") as fh:
            write_epsilon_csv(fh, xs)
        if cfg.verbosity:
            click.echo(f"wrote {points} rows to {output}", err=True)


# ---------------------------------------------------------------------------
# Witt-vector commands
# ---------------------------------------------------------------------------

@cli.group()
def witt():
    """Big-Witt-vector utilities: ghost coordinates, the diagonalized
    product, and the square-free parity criterion.  Vectors are given as
    the comma-separated coefficient list "h1,h2,..."."""


def _witt_from(coeffs: str, order: int | None, what: str) -> WittVector:
    cs = _parse_fraction_list(coeffs, what)
    n = order if order is not None else len(cs)
    _require(1 <= n <= _MAX_ORDER,
             f"truncation order must be in [1, {_MAX_ORDER}]")
    _require(len(cs) <= n, f"{what} has more coefficients than the order")
    return WittVector.from_coeffs({i + 1: c for i, c in enumerate(cs)}, n)


@witt.command("ghost")
@click.argument("coeffs")
@click.option("--order", type=int, default=None,
              help="Truncation order (default: the list length).")
@click.pass_obj
def witt_ghost(obj, coeffs, order):
    """Ghost coordinates of the vector COEFFS."""
    h = _witt_from(coeffs, order, "COEFFS")
    cfg = _config(obj, "witt ghost", orders=(h.order,))
    g = ghost(h)
    _emit(cfg,
          pretty=[f"g{n} = {g[n]}" for n in range(1, h.order + 1)],
          obj={"order": h.order,
               "coefficients": [str(h.coefficient(i))
                                for i in range(1, h.order + 1)],
               "ghosts": [str(g[n]) for n in range(1, h.order + 1)]},
          rows=(["n", "ghost"],
                [[n, str(g[n])] for n in range(1, h.order + 1)]))


@witt.command("mul")
@click.argument("left")
@click.argument("right")
@click.pass_obj
def witt_mul_cmd(obj, left, right):
    """Product of two vectors in the diagonalized ring structure."""
    a = _witt_from(left, None, "LEFT")
    b = _witt_from(right, None, "RIGHT")
    _require(a.order == b.order,
             "LEFT and RIGHT must have the same number of coefficients")
    cfg = _config(obj, "witt mul", orders=(a.order,))
    prod = witt_mul(a, b)
    cs = [prod.coefficient(i) for i in range(1, prod.order + 1)]
    _emit(cfg,
          pretty=[f"h{i} = {c}" for i, c in enumerate(cs, start=1)]
          + [f"integral: {'yes' if prod.is_integral() else 'no'}"],
          obj={"order": prod.order, "coefficients": [str(c) for c in cs],
               "integral": prod.is_integral()},
          rows=(["i", "coefficient"],
                [[i, str(c)] for i, c in enumerate(cs, start=1)]))


@witt.command("qcheck")
@click.argument("coeffs")
@click.option("--order", type=int, default=None)
@click.pass_obj
def witt_qcheck(obj, coeffs, order):
    """Square-free parity criterion h(-T) = h(T)^(-1); exits nonzero
    with the residual when it fails."""
    h = _witt_from(coeffs, order, "COEFFS")
    cfg = _config(obj, "witt qcheck", orders=(h.order,))
    w = q_subfunctor_check(h)
    pretty = [f"square-free parity: {'pass' if w.ok else 'FAIL'}"]
    if not w.ok:
        pretty.append(f"residual: {_render_series(w.residual)}")
    _emit(cfg, pretty=pretty,
          obj={"ok": w.ok,
               "residual": None if w.ok else _render_series(w.residual)})
    if not w.ok:
        sys.exit(1)


# ---------------------------------------------------------------------------
# vertex-operator commands
# ---------------------------------------------------------------------------

@cli.group()
def voa():
    """Vertex operators on the tensor-square model: mode tables, the
    multiplicativity check, root-of-unity closure, and lattice actions."""


@voa.command("y-check")
@click.option("--b", "b_str", required=True,
              help="First element (p/h mini-grammar).")
@click.option("--bprime", "bp_str", required=True,
              help="Second element (p/h mini-grammar).")
@click.option("--window", type=int, default=6, show_default=True,
              help="Compare mode entries for |z-exponent| up to this.")
@click.option("--weight-cap", type=int, default=6, show_default=True)
@click.option("--t", "t_str", default="0", show_default=True,
              help="Deformation parameter (rational).")
@click.pass_obj
def voa_y_check(obj, b_str, bp_str, window, weight_cap, t_str):
    """Multiplicativity of the operator assignment on a product of two
    elements, compared entry by entry inside the window.  Exits nonzero
    on failure and on an inconclusive (contentless) window."""
    cfg = _config(obj, "voa y-check", orders=(weight_cap, window))
    _require(1 <= weight_cap <= _MAX_VOA_CAP,
             f"--weight-cap must be in [1, {_MAX_VOA_CAP}]")
    _require(window >= 0, "--window must be nonnegative")
    b = parse_p_expr(b_str, "--b")
    bp = parse_p_expr(bp_str, "--bprime")
    t = _parse_scalar(t_str, "--t")
    _require(isinstance(t, Fraction), "--t must be an exact rational")
    w = Y_multiplicativity_check(b, bp, weight_cap=weight_cap,
                                 window=(-window, window), t=t)
    pretty = [f"status: {w.status}", f"modes compared: {w.compared}"]
    if w.status == "inconclusive":
        pretty.append("window carries no content; widen it or raise the cap")
    for miss in w.mismatches[:3]:
        pretty.append(f"mismatch: {miss}")
    _emit(cfg, pretty=pretty,
          obj={"status": w.status, "window": [-window, window],
               "weight_cap": weight_cap, "t": str(t),
               "modes_compared": w.compared,
               "mismatches": [str(m) for m in w.mismatches[:5]]})
    if not w.ok:
        sys.exit(1)


@voa.command("table")
@click.option("--n", "n", type=int, required=True,
              help="Power-sum index of the operator.")
@click.option("--t", "t_str", default="0", show_default=True)
@click.option("--weight-cap", type=int, default=6, show_default=True)
@click.pass_obj
def voa_table(obj, n, t_str, weight_cap):
    """Laurent-coefficient table of one power-sum operator."""
    cfg = _config(obj, "voa table", orders=(weight_cap,))
    _require(1 <= weight_cap <= _MAX_VOA_CAP,
             f"--weight-cap must be in [1, {_MAX_VOA_CAP}]")
    t = _parse_scalar(t_str, "--t")
    _require(isinstance(t, Fraction), "--t must be an exact rational")
    op = vertex_Y_powersum(n, t, weight_cap=weight_cap)
    table = vertex_table_obj(op)
    _emit(cfg,
          pretty=[f"{z}: " + " + ".join(
              name if c == "1" else f"{c}*{name}"
              for name, c in entry.items())
              for z, entry in table["coefficients"].items()],
          obj=table)


@voa.command("closure")
@click.option("--n", "n", type=int, required=True)
@click.option("--order", "order", type=int, required=True,
              help="Root-of-unity order for the deformation parameter.")
@click.option("--weight-cap", type=int, default=8, show_default=True)
@click.pass_obj
def voa_closure(obj, n, order, weight_cap):
    """Does the operator stay inside the root-of-unity quotient?  Prime
    orders are computed on an exact cyclotomic table; composite orders
    use the divisibility criterion directly."""
    cfg = _config(obj, "voa closure", orders=(weight_cap, order))
    _require(1 <= weight_cap <= _MAX_VOA_CAP,
             f"--weight-cap must be in [1, {_MAX_VOA_CAP}]")
    r = closure_report(n, order, weight_cap=weight_cap)
    _emit(cfg,
          pretty=[f"method: {r.method}",
                  "killed modes: " + (", ".join(str(m) for m in r.killed_modes)
                                      or "none"),
                  "leaking modes: " + (", ".join(str(m)
                                                 for m in r.leaking_modes)
                                       or "none"),
                  f"closure: {'pass' if r.ok else 'FAIL'}"],
          obj={"n": r.n, "order": r.order, "weight_cap": r.weight_cap,
               "method": r.method, "killed_modes": list(r.killed_modes),
               "leaking_modes": list(r.leaking_modes), "ok": r.ok})
    if not r.ok:
        sys.exit(1)


@voa.command("lattice")
@click.option("--gram", "gram_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSON Gram matrix ([[2]] or {\"gram\": [[2]]}).")
@click.option("--point", "point_str", required=True,
              help="Lattice point, e.g. \"1,0\".")
@click.option("--target", "target_str", default=None,
              help="Sector of the vacuum state acted on [default: origin].")
@click.option("--weight-cap", type=int, default=4, show_default=True)
@click.pass_obj
def voa_lattice(obj, gram_file, point_str, target_str, weight_cap):
    """Action of a lattice vertex operator on a sector vacuum: emits the
    Laurent table and runs the grading audit (exit nonzero on
    violations)."""
    cfg = _config(obj, "voa lattice", orders=(weight_cap,))
    _require(1 <= weight_cap <= _MAX_VOA_CAP,
             f"--weight-cap must be in [1, {_MAX_VOA_CAP}]")
    lattice = lattice_from_json(gram_file.read_text())
    point = _parse_int_tuple(point_str, "--point")
    _require(len(point) == lattice.rank,
             f"--point needs {lattice.rank} coordinates")
    target = (_parse_int_tuple(target_str, "--target") if target_str
              else (0,) * lattice.rank)
    _require(len(target) == lattice.rank,
             f"--target needs {lattice.rank} coordinates")
    uni = lattice_universe(lattice.rank)
    state = LatticeFockElement(lattice,
                               {target: SparsePoly.const(uni, 1)})
    op = vertex_Y_lattice(point, lattice, weight_cap=weight_cap)
    violations = lattice_grading_audit(op, state)
    table = lattice_action_obj(op, state)
    audit = "clean" if not violations else f"{len(violations)} violations"
    pretty = [f"point: {point_str}", f"grading audit: {audit}"]
    for entry in table["entries"]:
        terms = " + ".join(name if c == "1" else f"{c}*{name}"
                           for name, c in entry["terms"].items()) or "0"
        pretty.append(
            f"z^{entry['z']} @ {tuple(entry['component'])}: {terms}")
    table["grading_audit"] = audit
    _emit(cfg, pretty=pretty, obj=table)
    if violations:
        sys.exit(1)


if __name__ == "__main__":
    main()
