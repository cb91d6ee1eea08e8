import csv
import io

import numpy as np
import pytest

from lrspin import fidelity
from lrspin.cli import SWEEP_COLUMNS, TRACE_COLUMNS, main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_range_syntax():
    assert parse_range("5:100:5") == list(range(5, 101, 5))
    assert parse_range("5:12:5") == [5, 10]
    assert parse_range("3,7") == [3, 7]


def test_trace_two_spin(capsys):
    code, out, _ = run(capsys, "trace", "--n", "2", "--nu", "3", "--samples", "301", "-q")
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0]) == list(TRACE_COLUMNS)
    t = np.array([float(r["t"]) for r in rows])
    F = np.array([float(r["fidelity"]) for r in rows])
    assert np.abs(F - fidelity(np.abs(np.sin(t)))).max() <= 1e-9
    assert out.endswith("\n") and "\r" not in out


def test_trace_dh_to_file(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "trace", "--n", "50", "--nu", "3", "--variant", "dh", "--samples", "20001", "--output", str(path), "-q")
    assert code == 0 and out == ""
    rows = read_csv(path.read_text())
    assert max(float(r["fidelity"]) for r in rows) >= 0.99
    assert [p.name for p in tmp_path.iterdir()] == ["trace.csv"]  # temp file renamed away


def test_holes_conflict_with_variant(capsys):
    code, _, err = run(capsys, "trace", "--n", "50", "--nu", "3", "--variant", "dh", "--holes", "3,48")
    assert code == 2
    assert "holes" in err


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["trace", "--n", "5", "--bogus"])
    assert exc.value.code == 2


def test_sweep_both(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "5:20:5", "--nu", "3", "--variant", "both", "-q")
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0]) == list(SWEEP_COLUMNS)
    assert len(rows) == 8
    assert [(r["n"], r["variant"]) for r in rows[:2]] == [("5", "complete"), ("5", "dh")]
    for r in rows:
        assert float(r["ratio"]) == pytest.approx(float(r["t_id"]) / float(r["t_meas"]), rel=1e-12)


def test_sweep_full_grid_row_count(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "5:100:5", "--nu", "3", "--variant", "both", "--coarse-steps", "1000", "-q")
    assert code == 0
    assert len(read_csv(out)) == 40


def test_sweep_error_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "4,8", "--variant", "custom", "--holes", "4", "-q")
    assert code == 0
    rows = read_csv(out)
    assert rows[0]["fid_max"] == "ERROR:2" and rows[0]["t_meas"] == ""
    assert float(rows[1]["fid_max"]) > 0.5


def test_sweep_validation_exit_code(capsys):
    code, _, _ = run(capsys, "sweep", "--n", "4:10", "--variant", "dh", "-q")
    assert code == 2


def test_bit_identical_outputs(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(capsys, "sweep", "--n", "10,30", "--variant", "both", "-o", str(p), "-q")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_precision_of_numbers(capsys):
    _, out, _ = run(capsys, "sweep", "--n", "10", "--variant", "dh", "-q")
    row = read_csv(out)[0]
    assert len(row["t_est"].replace(".", "").lstrip("0")) >= 15


def test_eigvec(capsys):
    code, out, _ = run(capsys, "eigvec", "--n", "10", "--variant", "dh", "--j", "1,2", "-q")
    assert code == 0
    rows = read_csv(out)
    assert rows[1]["lambda_1"] == "null" and rows[8]["lambda_2"] == "null"
    assert abs(float(rows[0]["lambda_1"])) > 0.6


def test_eigvec_bad_index(capsys):
    code, _, _ = run(capsys, "eigvec", "--n", "4", "--j", "9", "-q")
    assert code == 2


def test_onsite(capsys):
    code, out, _ = run(capsys, "onsite", "--n", "12", "--shifted", "-q")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 12
    assert float(rows[0]["h_ii"]) == 0.0 == float(rows[-1]["h_ii"])


@pytest.mark.parametrize("variant", ["complete", "dh"])
def test_oracle_check_pass(capsys, variant):
    code, out, _ = run(capsys, "oracle-check", "--n", "8", "--nu", "3", "--variant", variant)
    assert code == 0
    assert out.startswith("PASS")


def test_oracle_check_refuses_large(capsys):
    code, _, err = run(capsys, "oracle-check", "--n", "13")
    assert code == 2
    assert "12" in err


def test_oracle_check_mismatch(monkeypatch, capsys):
    import lrspin.chain as chain

    real = chain.build_single_excitation_hamiltonian

    def broken(spec, keep_holes=False):
        h = real(spec, keep_holes)
        e = h.entries.copy()
        e[0, 1] = e[1, 0] = e[0, 1] + 1e-6
        return chain.HamiltonianMatrix(h.dim, e, h.basis_sites)

    monkeypatch.setattr(chain, "build_single_excitation_hamiltonian", broken)
    code, out, _ = run(capsys, "oracle-check", "--n", "5")
    assert code == 1
    assert "FAIL" in out and "sites 1,2" in out


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from lrspin import experiments as ex
    from lrspin.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError(10, 30, "forced")

    monkeypatch.setattr(ex, "run_fidelity_trace", boom)
    code, _, err = run(capsys, "trace", "--n", "10")
    assert code == 3 and "forced" in err


def test_module_entry_point():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "lrspin", "oracle-check", "--n", "4", "-q"], capture_output=True)
    assert r.returncode == 0
