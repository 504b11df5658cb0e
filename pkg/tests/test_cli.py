import pytest
from mpmath import mp
from pydantic import ValidationError

from mm_belyi.cli import PipelineConfig, Subcommand, main, parse_triple_file, run_pipeline
from mm_belyi.errors import FormatError, NotTransitiveError
from mm_belyi.exactnf import certify_map
from mm_belyi.formats import format_certified_map, format_solution, format_triple, parse_solution, parse_triple
from mm_belyi.perm import gamma0_triple, simultaneously_conjugate
from mm_belyi.triple import profile


@pytest.fixture
def passport_file(tmp_path):
    path = tmp_path / "level7.txt"
    path.write_text("n 276\nc0 1^12 2^132\nc1 3^92\ncinf 1^3 7^39\n")
    return path


@pytest.fixture
def gamma0_3_files(tmp_path, gamma0_3_solution):
    triple = tmp_path / "g3.txt"
    triple.write_text(format_triple(gamma0_triple(3)))
    guess = tmp_path / "g3.sol"
    guess.write_text(format_solution(gamma0_3_solution))
    return triple, guess


def test_analyze_passport(passport_file, capsys):
    assert main(["analyze", str(passport_file)]) == 0
    out = capsys.readouterr().out
    assert "# subcommand analyze" in out
    assert f"# input {passport_file.name} sha256 " in out
    assert "# status complete" in out
    for line in ["index 276", "genus 0", "unknowns 277", "equations 277", "normalization 3*a91 - 1*b1 - 7*c38 = 744"]:
        assert line in out.splitlines()


def test_analyze_triple_to_file(tmp_path, index7_level12, capsys):
    path = tmp_path / "t.txt"
    path.write_text(format_triple(index7_level12))
    out = tmp_path / "report.txt"
    assert main(["analyze", str(path), "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    rows = out.read_text().splitlines()
    assert "congruence noncongruence" in rows
    assert "cusp_widths 3^1 4^1" in rows


def test_ansatz(gamma0_3_files, capsys):
    assert main(["ansatz", str(gamma0_3_files[0])]) == 0
    assert "normalization 3*a0 - 3*c0 + 1*f0 = 744" in capsys.readouterr().out


def test_solve_with_guess(gamma0_3_files, gamma0_3_solution, gamma0_values, capsys):
    triple, guess = gamma0_3_files
    assert main(["solve", str(triple), "--guess", str(guess), "--prec-bits", "320"]) == 0
    sol = parse_solution(capsys.readouterr().out, gamma0_3_solution.ansatz)
    assert sol.precision_bits == 320
    with mp.workprec(320):
        assert abs(sol.value("e1") - gamma0_values[3]["e1"]) < mp.ldexp(1, -280)


def test_recognize_and_monodromy(tmp_path, gamma0_3_files, capsys):
    triple, guess = gamma0_3_files
    cert = tmp_path / "g3.map"
    assert main(["recognize", str(triple), str(guess), "--out", str(cert)]) == 0
    assert "identity: pass" in cert.read_text()
    assert main(["verify", str(cert)]) == 0
    assert "verified pass" in capsys.readouterr().out
    assert main(["monodromy", str(cert)]) == 0
    recovered = parse_triple(capsys.readouterr().out)
    assert simultaneously_conjugate(recovered, gamma0_triple(3)) is not None


def test_verify_tampered_map(tmp_path, gamma0_2_solution):
    text = format_certified_map(certify_map(gamma0_2_solution))
    assert "-536/1" in text
    path = tmp_path / "bad.map"
    path.write_text(text.replace("-536/1", "-488/1"))
    assert main(["verify", str(path)]) == 5


@pytest.mark.slow
def test_roundtrip(gamma0_3_files, capsys):
    triple, guess = gamma0_3_files
    assert main(["roundtrip", str(triple), "--guess", str(guess)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "matched_class 0" in out
    assert "field_degree 1" in out


def test_roundtrip_rejects_passport(passport_file):
    assert main(["roundtrip", str(passport_file)]) == 2


def test_bad_arguments(tmp_path, passport_file):
    assert main(["analyze", str(passport_file), "--delta", "1/8"]) == 2
    assert main(["recognize", str(passport_file)]) == 2
    assert main(["analyze", str(tmp_path / "missing.txt")]) == 2
    with pytest.raises(SystemExit) as e:
        main(["bogus", str(passport_file)])
    assert e.value.code == 2


def test_parse_triple_file():
    t = parse_triple_file("n 1\ns0 1\ns1 1\n")
    assert t.n == 1
    assert profile(parse_triple_file(format_triple(gamma0_triple(2)))).index == 3
    with pytest.raises(FormatError, match="not a bijection") as e:
        parse_triple_file("n 3\ns0 2 1 3\ns1 2 2 1\n", "dup.txt")
    assert e.value.line == 3
    with pytest.raises(NotTransitiveError):
        parse_triple_file("n 2\ns0 1 2\ns1 1 2\n")


def test_run_pipeline(passport_file):
    result = run_pipeline(PipelineConfig(subcommand=Subcommand.ANALYZE, inputs=(passport_file,)))
    assert result.exit_code == 0
    assert not result.partial
    assert "cusps 42" in result.text.splitlines()
    with pytest.raises(ValidationError, match="takes 2 input"):
        PipelineConfig(subcommand=Subcommand.RECOGNIZE, inputs=(passport_file,))


def test_malformed_triple(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("n 3\ns0 2 1\n")
    assert main(["analyze", str(path)]) == 2
