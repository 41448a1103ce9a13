"""CLI surface: mini-grammar, subcommands, formats, cache, exit codes.

The README's console examples are executed verbatim at the bottom, so
every documented invocation stays honest.
"""

import json
import re
import shlex
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner

from qgenus.cli import (ExprError, RunConfig, cli, parse_p_expr, parse_q_expr,
                        _render_series)
from qgenus.errors import DomainError
from qgenus.qfunctions import QElement
from qgenus.rings import SparsePoly, UPS
from qgenus.series import TruncatedSeries

runner = CliRunner()


def run(*args, **kw):
    return runner.invoke(cli, list(args), **kw)


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

class TestGrammar:
    def test_precedence_and_reduction(self):
        e = parse_q_expr("q1^2 - 2*q2")
        assert e == QElement.zero()
        e = parse_q_expr("q3*q3 - 2*q1*q5")
        assert e == QElement.gen(3) ** 2 - 2 * QElement.gen(1) * QElement.gen(5)

    def test_unary_minus_and_parens(self):
        assert parse_q_expr("-(q1 - q1)") == QElement.zero()
        assert parse_q_expr("-2*(q1 + q1)") == -4 * QElement.gen(1)

    def test_rational_literals(self):
        assert parse_q_expr("1/2*q1") == QElement.monomial((1,), Fraction(1, 2))
        assert parse_q_expr("3") == QElement.monomial((), 3)

    def test_x_symbols_live_in_the_same_algebra(self):
        # 2*x0 is the first square-free generator
        assert parse_q_expr("2*x0") == QElement.gen(1)

    def test_power_sum_symbols(self):
        assert parse_p_expr("p2") == SparsePoly.gen(UPS, 2)
        p1, p2 = SparsePoly.gen(UPS, 1), SparsePoly.gen(UPS, 2)
        assert parse_p_expr("h2") == (p1 * p1 + p2) * Fraction(1, 2)

    @pytest.mark.parametrize("src,pos", [
        ("q1 @ q2", 3),
        ("q1 +", 4),
        ("(q1", 3),
        ("q1^1/2", 3),
        ("y7", 0),
        ("1/0", 0),
        ("q1 q2", 3),
    ])
    def test_errors_carry_positions(self, src, pos):
        with pytest.raises(ExprError) as err:
            from qgenus.cli import _Parser, _q_symbol
            _Parser(src, lambda c: QElement.monomial((), c), _q_symbol).parse()
        assert err.value.pos == pos

    def test_config_validation(self):
        with pytest.raises(DomainError):
            RunConfig("x", fmt="yaml")
        with pytest.raises(DomainError):
            RunConfig("x", orders=(100,))
        with pytest.raises(DomainError):
            RunConfig("x", primes=(1,))

    def test_series_renderer(self):
        ts = TruncatedSeries.univariate(
            "T", {0: 1, 2: -1, 3: Fraction(1, 2)}, 4)
        assert _render_series(ts) == "1 - T^2 + 1/2*T^3 + O(T^5)"
        assert _render_series(TruncatedSeries.zero(("T",), 3)) == "O(T^4)"


# ---------------------------------------------------------------------------
# square-free commands
# ---------------------------------------------------------------------------

class TestAlgebraCommands:
    def test_qreduce_example(self):
        r = run("qreduce", "q1^2")
        assert r.exit_code == 0
        assert r.stdout == "2*q2\nx-basis: 4*x0^2\n"

    def test_qfunction_example(self):
        r = run("qfunction", "2,1")
        assert r.exit_code == 0
        assert r.stdout.splitlines()[0] == "q2*q1 - 2*q3"

    def test_qfunction_canonicalizes_order(self):
        assert run("qfunction", "1,2").stdout == run("qfunction", "2,1").stdout

    def test_inner_example(self):
        r = run("inner", "q1", "q1")
        assert r.exit_code == 0
        assert r.stdout == "2\n"

    def test_inner_json_has_both_bases(self):
        r = run("-f", "json", "inner", "q1", "q1")
        obj = json.loads(r.stdout)
        assert obj == {"value": "2", "left_x": "2*x0", "right_x": "2*x0"}

    def test_json_format(self):
        obj = json.loads(run("-f", "json", "qreduce", "q2^2").stdout)
        assert obj == {"q_basis": "2*q3*q1 - 2*q4", "x_basis":
                       json.loads(run("-f", "json", "qreduce",
                                      "2*q3*q1 - 2*q4").stdout)["x_basis"]}

    def test_parse_error_is_usage_error(self):
        r = run("qreduce", "q1 @ q2")
        assert r.exit_code == 2
        assert "position 3" in r.stderr

    def test_non_strict_partition_rejected(self):
        r = run("qfunction", "2,2")
        assert r.exit_code == 2
        assert "strict" in r.stderr

    def test_bad_partition_tokens(self):
        assert run("qfunction", "2,x").exit_code == 2
        assert run("qfunction", "0").exit_code == 2

    def test_csv_unsupported_here(self):
        r = run("-f", "csv", "qreduce", "q1")
        assert r.exit_code == 2
        assert "no CSV rendering" in r.stderr


# ---------------------------------------------------------------------------
# intersection table
# ---------------------------------------------------------------------------

class TestIntersection:
    def test_seed_and_first_entries(self, tmp_path):
        r = run("intersection", "--max-weight", "3", "--no-cache")
        assert r.exit_code == 0
        lines = r.stdout.splitlines()
        assert "<tau_0^3> = 1" in lines
        assert "<tau_1> = 1/24" in lines

    def test_weight_four_includes_tau_one(self):
        r = run("intersection", "--max-weight", "4", "--no-cache")
        assert "<tau_1> = 1/24" in r.stdout.splitlines()

    def test_corrected_two_point_entry(self):
        # weight 6 covers the degree-1 four-point entry
        r = run("intersection", "--max-weight", "6", "--no-cache")
        assert "<tau_0^3 tau_1> = 1" in r.stdout.splitlines()

    def test_json_and_csv_forms(self):
        obj = json.loads(
            run("-f", "json", "intersection", "--max-weight", "4",
                "--no-cache").stdout)
        assert obj["format"] == "intersection-table/1"
        assert obj["entries"]["3"] == "1"
        assert obj["entries"]["0,1"] == "1/24"
        csv_out = run("-f", "csv", "intersection", "--max-weight", "4",
                      "--no-cache").stdout.splitlines()
        assert csv_out[0] == "index,n,genus,degree,weight,value,decimal"
        assert '"0,1",1,1,1,3,1/24,0.041666666666666664' in csv_out

    def test_cache_roundtrip_and_reuse(self, tmp_path):
        cache = tmp_path / "table.json"
        r1 = run("--cache-path", str(cache), "intersection",
                 "--max-weight", "6")
        assert r1.exit_code == 0 and cache.exists()
        saved = json.loads(cache.read_text())
        assert saved["format"] == "intersection-table/1"
        # second run answers a shallower query from the same cache,
        # stdout identical to a fresh computation
        r2 = run("--cache-path", str(cache), "intersection",
                 "--max-weight", "4")
        fresh = run("intersection", "--max-weight", "4", "--no-cache")
        assert r2.stdout == fresh.stdout

    def test_corrupt_cache_regenerates_with_warning(self, tmp_path):
        cache = tmp_path / "table.json"
        cache.write_text("not json at all {")
        r = run("--cache-path", str(cache), "intersection",
                "--max-weight", "3")
        assert r.exit_code == 0
        assert "regenerating" in r.stderr
        assert json.loads(cache.read_text())["format"] == "intersection-table/1"

    def test_version_mismatch_recomputes(self, tmp_path):
        cache = tmp_path / "table.json"
        cache.write_text(json.dumps({"format": "intersection-table/0",
                                     "complete_through": 9, "entries": {}}))
        r = run("--cache-path", str(cache), "intersection",
                "--max-weight", "3")
        assert r.exit_code == 0
        assert "regenerating" in r.stderr

    def test_env_var_override(self, tmp_path):
        r = run("intersection", "--max-weight", "3",
                env={"QGENUS_CACHE_DIR": str(tmp_path)})
        assert r.exit_code == 0
        assert (tmp_path / "intersection.json").exists()

    def test_weight_cap(self):
        assert run("intersection", "--max-weight", "40").exit_code == 2

    def test_determinism(self):
        a = run("-f", "json", "intersection", "--max-weight", "5",
                "--no-cache").stdout
        b = run("-f", "json", "intersection", "--max-weight", "5",
                "--no-cache").stdout
        assert a == b


# ---------------------------------------------------------------------------
# virasoro-check
# ---------------------------------------------------------------------------

class TestVirasoroCheck:
    def test_central_term_example(self):
        r = run("virasoro-check", "--m", "2", "--n", "-2")
        assert r.exit_code == 0
        lines = r.stdout.splitlines()
        assert lines[0] == "central term: 1/2"
        assert lines[-1] == "bracket [L_2, L_-2]: pass"

    def test_no_central_term_off_diagonal(self):
        r = run("virasoro-check", "--m", "1", "--n", "2", "--max-weight", "4")
        assert r.stdout.splitlines()[0] == "central term: 0"
        assert r.exit_code == 0

    def test_json_form(self):
        obj = json.loads(run("-f", "json", "virasoro-check", "--m", "3",
                             "--n", "-3", "--max-weight", "4").stdout)
        assert obj["central_term"] == "2"
        assert obj["ok"] is True
        assert obj["monomials_checked"] > 0

    def test_mode_cap(self):
        assert run("virasoro-check", "--m", "9", "--n", "-9").exit_code == 2


# ---------------------------------------------------------------------------
# genus commands
# ---------------------------------------------------------------------------

class TestKw:
    def test_projective_line(self):
        r = run("kw", "--cpn", "1")
        assert r.exit_code == 0
        assert r.stdout == ("-2*x0^-1*x1\n"
                            "q-basis: (2*q2*q1 - 6*q3) / q1\n")

    def test_point_image(self):
        r = run("kw", "--cpn", "0")
        assert r.stdout.splitlines() == ["1", "q-basis: 1"]

    def test_integrality_window(self):
        r = run("kw", "--integrality", "12")
        assert r.exit_code == 0
        assert "all integral" in r.stdout

    def test_modp_cutoffs(self):
        for p, cutoff in [(3, 2), (5, 3), (7, 4)]:
            r = run("kw", "--modp", str(p))
            assert r.exit_code == 0, r.stderr
            lines = r.stdout.splitlines()
            assert lines[0] == f"mod-{p} vanishing predicted from k >= {cutoff}"
            assert lines[-1] == "prediction: pass"
            assert f"k = {cutoff}: vanishes mod {p}" in lines
            assert f"k = {cutoff - 1}: nonzero mod {p}" in lines

    def test_exactly_one_mode(self):
        assert run("kw").exit_code == 2
        assert run("kw", "--cpn", "1", "--modp", "3").exit_code == 2
        assert run("kw", "--modp", "4").exit_code == 2


class TestFgl:
    def _write(self, tmp_path, obj):
        f = tmp_path / "exp.json"
        f.write_text(json.dumps(obj))
        return str(f)

    def test_truncated_exponential_is_a_law(self, tmp_path):
        f = self._write(tmp_path, {"order": 5, "coefficients":
                                   {"1": "1", "2": "1/2", "3": "1/6"}})
        r = run("fgl", "--exp", f)
        assert r.exit_code == 0
        lines = r.stdout.splitlines()
        assert "associativity: pass" in lines
        assert lines[-1].startswith("logarithm: T - 1/2*T^2 + 1/3*T^3")

    def test_json_report(self, tmp_path):
        f = self._write(tmp_path, {"order": 4, "coefficients": {"1": "1"}})
        obj = json.loads(run("-f", "json", "fgl", "--exp", f).stdout)
        assert obj["axioms"] == {"unit": True, "commutativity": True,
                                 "associativity": True, "inverse": True}
        assert obj["logarithm"] == {"1": "1"}

    def test_invalid_files(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert run("fgl", "--exp", str(bad)).exit_code == 2
        f = self._write(tmp_path, {"order": 4, "coefficients": {"1": "0"}})
        assert run("fgl", "--exp", str(f)).exit_code == 2  # no unit coeff
        f = self._write(tmp_path, {"order": 40, "coefficients": {"1": "1"}})
        assert run("fgl", "--exp", str(f)).exit_code == 2
        f = self._write(tmp_path, {"order": 4, "coefficients": {"9": "1"}})
        assert run("fgl", "--exp", str(f)).exit_code == 2


# ---------------------------------------------------------------------------
# analytic commands
# ---------------------------------------------------------------------------

class TestMl:
    def test_imaginary_axis_comparison(self):
        r = run("ml", "--alpha", "0.5", "--z", "10i", "--compare-asymptotic")
        assert r.exit_code == 0
        assert r.stdout.splitlines()[-1].endswith("within bound: yes")

    def test_plain_series_point(self):
        obj = json.loads(run("-f", "json", "ml", "--alpha", "1",
                             "--z", "1").stdout)
        assert abs(obj["series"]["value"] - 2.718281828459045) < 1e-15
        assert obj["series"]["method"] == "series"

    def test_csv_row(self):
        out = run("-f", "csv", "ml", "--alpha", "0.5", "--z", "-4.0",
                  "--compare-asymptotic").stdout.splitlines()
        assert out[0] == ("alpha,z,series,series_error,asymptotic,"
                          "asymptotic_error,difference,bound,within")
        assert out[1].endswith(",yes")

    def test_rational_alpha_accepted(self):
        r = run("ml", "--alpha", "1/2", "--z", "-6.0", "--compare-asymptotic")
        assert r.exit_code == 0

    def test_honest_failure_near_the_axis_origin(self):
        # At 2i the function carries a beyond-all-orders exp(z^2) part
        # (real size ~1.8e-2) that the tail cannot see; the comparison
        # honestly fails and the command exits 1.
        r = run("ml", "--alpha", "0.5", "--z", "2i", "--compare-asymptotic")
        assert r.exit_code == 1
        assert r.stdout.splitlines()[-1].endswith("within bound: NO")

    def test_bad_inputs(self):
        assert run("ml", "--alpha", "0.75", "--z", "3+4i").exit_code == 2
        assert run("ml", "--alpha", "x", "--z", "1").exit_code == 2
        assert run("ml", "--alpha", "0.5", "--z", "zebra").exit_code == 2
        assert run("ml", "--alpha", "3", "--z", "1").exit_code == 2


class TestEpsilonTable:
    def test_grid_and_header(self):
        out = run("epsilon-table", "--x-min", "1", "--x-max", "100",
                  "--points", "3").stdout.splitlines()
        assert out[0] == "x,series,asymptotic,bound"
        assert len(out) == 4
        assert out[1].startswith("1.0,")
        assert out[2].startswith("10.0,")
        assert out[3].startswith("100.0,")

    def test_linear_spacing(self):
        out = run("epsilon-table", "--x-min", "1", "--x-max", "3",
                  "--points", "3", "--linear").stdout.splitlines()
        assert out[2].startswith("2.0,")

    def test_output_file(self, tmp_path):
        dest = tmp_path / "eps.csv"
        r = run("epsilon-table", "--points", "2", "--output", str(dest))
        assert r.exit_code == 0
        assert dest.read_text().splitlines()[0] == "x,series,asymptotic,bound"

    def test_bad_grids(self):
        assert run("epsilon-table", "--x-min", "5", "--x-max", "1").exit_code == 2
        assert run("epsilon-table", "--points", "1").exit_code == 2
        assert run("epsilon-table", "--x-min", "-1", "--x-max", "1").exit_code == 2


# ---------------------------------------------------------------------------
# witt commands
# ---------------------------------------------------------------------------

class TestWittCommands:
    def test_ghost(self):
        r = run("witt", "ghost", "1,-2,0")
        assert r.stdout == "g1 = 1\ng2 = 5\ng3 = 7\n"

    def test_ghost_padding_order(self):
        r = run("witt", "ghost", "1", "--order", "4")
        assert r.stdout == "g1 = 1\ng2 = 1\ng3 = 1\ng4 = 1\n"

    def test_mul_unit(self):
        r = run("witt", "mul", "1,0,0", "1,0,0")
        assert r.stdout == "h1 = 1\nh2 = 0\nh3 = 0\nintegral: yes\n"

    def test_mul_length_mismatch(self):
        assert run("witt", "mul", "1,2", "1").exit_code == 2

    def test_qcheck_pass(self):
        r = run("witt", "qcheck", "1,1/2,1/6,1/24")
        assert r.exit_code == 0
        assert r.stdout == "square-free parity: pass\n"

    def test_qcheck_fail(self):
        r = run("witt", "qcheck", "1,0,-1/2,0")
        assert r.exit_code == 1
        assert r.stdout.splitlines()[0] == "square-free parity: FAIL"
        assert "residual: -T^2" in r.stdout

    def test_bad_coefficients(self):
        assert run("witt", "ghost", "1,zebra").exit_code == 2
        assert run("witt", "ghost", "1,2", "--order", "1").exit_code == 2


# ---------------------------------------------------------------------------
# voa commands
# ---------------------------------------------------------------------------

class TestVoaCommands:
    def test_y_check_example(self):
        r = run("voa", "y-check", "--b", "p1", "--bprime", "p1",
                "--window", "6")
        assert r.exit_code == 0
        assert r.stdout.splitlines()[0] == "status: pass"

    def test_y_check_homogeneous_pair(self):
        r = run("voa", "y-check", "--b", "h1", "--bprime", "h2",
                "--window", "6")
        assert r.exit_code == 0

    def test_y_check_zero_element_inconclusive(self):
        r = run("voa", "y-check", "--b", "0", "--bprime", "p1",
                "--window", "6")
        assert r.exit_code == 1
        assert r.stdout.splitlines()[0] == "status: inconclusive"

    def test_table(self):
        r = run("voa", "table", "--n", "1", "--weight-cap", "3")
        assert r.stdout == ("z^-4: 3*pd3\nz^-3: -2*pd2\nz^-2: pd1\n"
                            "z^0: p1\nz^1: 2*p2\nz^2: 3*p3\n")

    def test_table_json(self):
        obj = json.loads(run("-f", "json", "voa", "table", "--n", "1",
                             "--weight-cap", "3").stdout)
        assert obj["coefficients"]["z^0"] == {"p1": "1"}

    def test_table_degenerate_t(self):
        assert run("voa", "table", "--n", "2", "--t", "1").exit_code == 2

    def test_closure_prime(self):
        r = run("voa", "closure", "--n", "1", "--order", "3",
                "--weight-cap", "9")
        assert r.exit_code == 0
        lines = r.stdout.splitlines()
        assert lines[0] == "method: cyclotomic"
        assert lines[1] == "killed modes: 3, 6, 9"
        assert lines[-1] == "closure: pass"

    def test_closure_composite(self):
        r = run("voa", "closure", "--n", "1", "--order", "4",
                "--weight-cap", "8")
        assert r.exit_code == 0
        assert r.stdout.splitlines()[0] == "method: divisibility"

    def test_closure_divided_index(self):
        assert run("voa", "closure", "--n", "6", "--order", "3").exit_code == 2

    def test_lattice_action(self, tmp_path):
        gram = tmp_path / "gram.json"
        gram.write_text("[[2]]")
        r = run("voa", "lattice", "--gram", str(gram), "--point", "1",
                "--weight-cap", "3")
        assert r.exit_code == 0
        lines = r.stdout.splitlines()
        assert lines[1] == "grading audit: clean"
        assert "z^0 @ (1,): 1" in lines
        assert "z^1 @ (1,): p1[0]" in lines

    def test_lattice_json(self, tmp_path):
        gram = tmp_path / "gram.json"
        gram.write_text('{"gram": [[2, 0], [0, 2]]}')
        obj = json.loads(run("-f", "json", "voa", "lattice", "--gram",
                             str(gram), "--point", "1,0",
                             "--weight-cap", "2").stdout)
        assert obj["gram"] == [[2, 0], [0, 2]]
        assert obj["grading_audit"] == "clean"
        assert all(set(e) >= {"z", "component", "terms"}
                   for e in obj["entries"])

    def test_lattice_rank_mismatch(self, tmp_path):
        gram = tmp_path / "gram.json"
        gram.write_text("[[2]]")
        assert run("voa", "lattice", "--gram", str(gram),
                   "--point", "1,0").exit_code == 2


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

class TestExitCodes:
    def test_usage_error_is_two(self):
        assert run("qreduce").exit_code == 2          # missing argument
        assert run("nonsense").exit_code == 2          # unknown subcommand

    def test_internal_error_is_three(self, monkeypatch):
        import qgenus.cli as cli_mod

        def boom(*a, **k):
            raise RuntimeError("wired to fail")

        monkeypatch.setattr(cli_mod, "ghost", boom)
        r = run("witt", "ghost", "1")
        assert r.exit_code == 3
        assert "internal error" in r.stderr

    def test_check_failure_is_one(self):
        assert run("witt", "qcheck", "1,1").exit_code == 1


# ---------------------------------------------------------------------------
# README doc-test harness: every console example in the docs must run
# and print exactly what the docs say.
# ---------------------------------------------------------------------------

README = Path(__file__).resolve().parent.parent / "README.md"


def _console_examples():
    """Yield (command_args, expected_stdout) pairs from README console
    blocks.  Lines starting with '$ qgenus' are commands; following lines
    up to the next command or fence end are the expected output."""
    if not README.exists():
        return []
    text = README.read_text()
    blocks = re.findall(r"```console\n(.*?)```", text, flags=re.S)
    examples = []
    for block in blocks:
        lines = block.splitlines()
        i = 0
        while i < len(lines):
            line = lines[i]
            if line.startswith("$ "):
                argv = shlex.split(line[2:])
                assert argv[0] == "qgenus", f"non-qgenus example: {line}"
                expected = []
                i += 1
                while i < len(lines) and not lines[i].startswith("$ "):
                    expected.append(lines[i])
                    i += 1
                examples.append((argv[1:], "\n".join(expected)))
            else:  # pragma: no cover - malformed block
                raise AssertionError(f"stray line in console block: {line!r}")
    return examples


def test_readme_has_examples():
    assert README.exists()
    assert len(_console_examples()) >= 6


@pytest.mark.parametrize("argv,expected", _console_examples() or
                         [pytest.param(None, None, marks=pytest.mark.skip)])
def test_readme_examples_run_verbatim(argv, expected, tmp_path):
    r = runner.invoke(cli, argv, env={"QGENUS_CACHE_DIR": str(tmp_path)})
    assert r.exit_code == 0, r.stderr or r.stdout
    assert r.stdout.rstrip("\n") == expected.rstrip("\n")
