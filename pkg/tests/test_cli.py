import json
import re
import subprocess
import sys

import pytest

from chatelet import verify
from chatelet.cli import run
from chatelet.conic import ScanReport
from chatelet.errors import VerificationError

BUNDLE = ["--curve", "-432,15120", "--a", "5", "--f", "1,-4"]
ERROR_LINE = re.compile(r"^error\[(argument|resource|verification)\]: \S.*\n$")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_quad_eval(capsys):
    code, out, _ = call(capsys, "quad-eval", "--poly", "1,0,-432,15120", "--d", "5", "--elt", "3,9")
    assert code == 0 and out == "17496 + 0*sqrt(5)\n"


def test_gl2_verify_h8(capsys):
    code, out, _ = call(capsys, "gl2", "verify", "h8-quotient")
    assert code == 0 and "order=8 normal=true quotient=S3" in out


def test_gcd_scan_csv(capsys):
    code, out, _ = call(capsys, "gcd-scan", *BUNDLE, "--n", "3", "--pmax", "10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# ") and lines[1] == "p,order,gcd_one"
    assert lines[2].split(",")[0] == "7"
    rep = ScanReport.from_csv(out)
    assert rep.summary["witnesses"][0] == 7


def test_count(capsys):
    for p, n in [(5, 10), (7, 8), (13, 19)]:
        for method in ("naive", "bsgs"):
            code, out, _ = call(capsys, "count", "--curve", "-432,15120", "--p", str(p), "--method", method)
            assert code == 0 and f"order={n} " in out


def test_omega(capsys):
    code, out, _ = call(capsys, "omega", *BUNDLE, "--pmax", "30")
    assert code == 0
    assert [r["p"] for r in ScanReport.from_csv(out).rows] == [7, 13, 17, 23]


def test_fibers(capsys):
    code, out, _ = call(capsys, "fibers", *BUNDLE, "--base", "4,116", "--gen", "4,116", "--range", "3", "--primes", "3")
    assert code == 0
    rows = {r["k"]: r for r in ScanReport.from_csv(out).rows}
    assert rows[1]["soluble_at_3"] is False and rows[0]["soluble_at_3"] is True


def test_coset_scan(capsys):
    code, out, _ = call(
        capsys, "coset-scan", *BUNDLE, "--point", "2708842504/3790809,-140929155669124/7380705123", "--primes", "7,13,73", "--radius", "0"
    )
    assert code == 0
    assert ScanReport.from_csv(out).summary["meets_at"] == [7, 73]


def test_torsion(capsys):
    code, out, _ = call(capsys, "torsion", "--curve", "0,1", "--n", "3")
    assert code == 0 and out == "(0,-1)\n(0,1)\n"
    code, out, _ = call(capsys, "torsion", "--curve", "-432,15120", "--n", "5", "--certificate", "10")
    assert code == 0 and out.startswith("none\ncertificate=5:10,")


def test_galois(capsys):
    code, out, _ = call(capsys, "--format", "json", "galois", "--curve", "9,-18", "--ell", "5", "--pmax", "500")
    assert code == 0
    data = json.loads(out)
    assert data["ruled_out"]["exceptional"] is False
    assert set(data["ratio_values"]) <= {0, 1, 2, 4}
    code, out, _ = call(capsys, "galois", "--curve", "-432,15120", "--ell", "5", "--pmax", "500")
    assert out.startswith("ell=5 surjective_certified")


def test_recip_and_find_prime(capsys):
    assert call(capsys, "recip", "--a", "-1", "--b", "-1")[1] == "ramified=2,real\n"
    assert call(capsys, "recip", "--a", "1", "--b", "11")[1] == "ramified=none\n"
    assert call(capsys, "recip", "--a", "5", "--b", "1/2")[1] == "ramified=2,5\n"
    assert call(capsys, "find-prime", "--mod", "8:7", "5:2", "--bound", "100")[1] == "7\n"
    assert call(capsys, "find-prime", "--mod", "4:0")[1] == "none\n"


@pytest.mark.parametrize("target", sorted(verify.TARGETS))
def test_every_verify_target(capsys, target):
    code, out, err = call(capsys, "gl2", "verify", target)
    assert code == 0, err
    assert out.startswith(f"{target}: ") and "=" in out and out.count("\n") == 1


# --- errors -------------------------------------------------------------------

@pytest.mark.parametrize(
    "argv",
    [
        ["count", "--curve", "1;1", "--p", "7"],
        ["count", "--curve", "-432,15120", "--p", "43"],
        ["count", "--curve", "0,0", "--p", "7"],
        ["gcd-scan", *BUNDLE, "--n", "1", "--pmax", "10"],
        ["galois", "--curve", "-432,15120", "--ell", "5", "--pmax", "7"],
        ["--jobs", "0", "omega", *BUNDLE, "--pmax", "30"],
        ["gl2", "verify", "no-such-lemma"],
        ["quad-eval", "--poly", "1,0", "--d", "4", "--elt", "1,1"],
        ["find-prime", "--mod", "8"],
        ["nonsense"],
        [],
    ],
)
def test_argument_errors(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 1 and out == ""
    assert ERROR_LINE.match(err) and err.startswith("error[argument]")


def test_resource_error(capsys):
    code, _, err = call(
        capsys, "fibers", *BUNDLE, "--base", "4,116", "--gen", "4,116", "--range", "40", "--primes", "3",
        "--digit-limit", "50",
    )
    assert code == 2 and ERROR_LINE.match(err) and err.startswith("error[resource]")


def test_verification_error(capsys, monkeypatch):
    def broken():
        raise VerificationError("order 7 is not 8")

    monkeypatch.setitem(verify.TARGETS, "h8-quotient", broken)
    code, out, err = call(capsys, "gl2", "verify", "h8-quotient")
    assert code == 3 and out == "" and err == "error[verification]: order 7 is not 8\n"


def test_console_script_exit_code():
    proc = subprocess.run(
        [sys.executable, "-m", "chatelet", "count", "--curve", "1,1", "--p", "31"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1 and proc.stderr.startswith("error[argument]")


# --- reproducibility, config, formats ----------------------------------------------

def test_output_files_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert run(["--output", str(path), "gcd-scan", *BUNDLE, "--n", "30", "--pmax", "500"]) == 0
    assert capsys.readouterr().out == ""
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_jobs_do_not_change_output(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        path = tmp_path / f"{jobs}.json"
        run(["--jobs", jobs, "--format", "json", "--output", str(path), "gcd-scan", *BUNDLE, "--n", "6", "--pmax", "2000"])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# bundle\ncurve = -432,15120\na=5\nf=1,-4\nn=3\npmax=100\n")
    code, out, _ = call(capsys, "--config", str(cfg), "gcd-scan")
    assert code == 0
    rep = ScanReport.from_csv(out)
    assert rep.parameters["cli"]["pmax"] == 100 and rep.parameters["n"] == 3
    code, out, _ = call(capsys, "--config", str(cfg), "gcd-scan", "--pmax", "10")
    rep = ScanReport.from_csv(out)
    assert rep.parameters["cli"]["pmax"] == 10 and [r["p"] for r in rep.rows] == [7]


def test_config_rejects_unknown_and_malformed_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("curve=-432,15120\ncolour=blue\n")
    code, _, err = call(capsys, "--config", str(cfg), "count", "--p", "7")
    assert code == 1 and "colour" in err
    cfg.write_text("curve\n")
    assert call(capsys, "--config", str(cfg), "count", "--p", "7")[0] == 1
    assert call(capsys, "--config", str(tmp_path / "missing.cfg"), "count", "--p", "7")[0] == 1


def test_config_repeatable_keys(tmp_path, capsys):
    cfg = tmp_path / "coset.cfg"
    cfg.write_text("curve=-432,15120\na=5\nf=1,-4\ncoset_gen=4,116;4,116\nprimes=7,13\nradius=1\n")
    code, out, _ = call(capsys, "--config", str(cfg), "coset-scan", "--point", "4,116")
    assert code == 0
    assert ScanReport.from_csv(out).parameters["cli"]["coset_gen"] == ["(4,116)", "(4,116)"]


def test_csv_and_json_carry_the_same_data(capsys):
    argv = ["fibers", *BUNDLE, "--base", "4,116", "--gen", "4,116", "--range", "4", "--primes", "3,7,13"]
    _, csv_text, _ = call(capsys, "--format", "csv", *argv)
    _, json_text, _ = call(capsys, "--format", "json", *argv)
    assert ScanReport.from_csv(csv_text) == ScanReport.from_json(json_text)
    data = json.loads(json_text)
    assert isinstance(data["config"], dict) and isinstance(data["rows"], list)


def test_report_echoes_resolved_config(capsys):
    _, out, _ = call(capsys, "gcd-scan", *BUNDLE, "--n", "3", "--pmax", "10")
    cli = ScanReport.from_csv(out).parameters["cli"]
    assert cli == {"a": 5, "curve": "-432,15120", "f": [1, -4], "n": 3, "pmax": 10}


def test_negative_values_in_both_spellings(capsys):
    a = call(capsys, "count", "--curve", "-432,15120", "--p", "13")[1]
    b = call(capsys, "count", "--curve=-432,15120", "--p", "13")[1]
    assert a == b == "p=13 order=19 trace=-5\n"
    assert call(capsys, "recip", "--a", "-1", "--b", "-3")[0] == 0


def test_help_documents_coefficient_order(capsys):
    with pytest.raises(SystemExit):
        run(["quad-eval", "--help"])
    assert "highest degree first" in capsys.readouterr().out
