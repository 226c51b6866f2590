import json

import numpy as np
import pytest

from pseudocomp import cli, suites
from pseudocomp.stats import CheckReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


def test_density_hermitian(capsys):
    code, out, _ = run(capsys, "density", "--hermitian", "0,1", "--points", "5")
    assert code == 0
    assert out.startswith("# command=density\n# version=")
    body = rows(out)
    assert body[0] == "t,rho"
    assert [float(r.split(",")[1]) for r in body[2:-1]] == pytest.approx([1, 1, 1])


def test_density_grid(capsys, tmp_path):
    svg = tmp_path / "d.svg"
    code, out, _ = run(
        capsys, "density", "--matrix", "diag:0,1,1i,1+1i", "--grid", "0,1,0,1,4,4",
        "--ktheta", "64", "--svg", str(svg),
    )
    assert code == 0
    assert len(rows(out)) == 1 + 16
    assert svg.read_text().startswith("<svg") or "<svg" in svg.read_text()


def test_smallball(capsys):
    code, out, _ = run(capsys, "smallball", "--matrix", "ginibre:12:1", "--eps", "1e-2,1e-1", "--samples", "2000", "--seed", "3")
    assert code == 0
    body = rows(out)
    assert body[0] == "eps,p_hat,ci_upper,bound,holds"
    assert len(body) == 3
    assert all(r.endswith("true") for r in body[1:])


def test_tail(capsys):
    code, out, _ = run(capsys, "tail", "--matrix", "jordan:12", "--ell", "2", "--eps", "1e-3,1e-2", "--samples", "500")
    assert code == 0
    assert rows(out)[0] == "eps,p_hat,ci_upper,bound,second_order,holds"


def test_numrange(capsys, tmp_path):
    svg = tmp_path / "w.svg"
    code, out, _ = run(capsys, "numrange", "--matrix", "jordan:2", "--angles", "16", "--svg", str(svg))
    assert code == 0
    body = rows(out)
    assert len(body) == 17
    assert float(body[1].split(",")[1]) == pytest.approx(0.5)
    assert "<polygon" in svg.read_text()


def test_psarea_two_rows(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, out, _ = run(
        capsys, "psarea", "--matrix", "jordan:12", "--ell", "3", "--eps", "1e-2,1e-3",
        "--samples", "50", "--seed", "1", "--summary", str(summary),
    )
    assert code == 0
    body = rows(out)
    assert body[0].split(",")[:4] == ["eps", "mean_lo", "mean_hi", "ci"]
    assert len(body) == 3
    verdicts = json.loads(summary.read_text())["verdicts"]
    assert len(verdicts) == 2 and all(v["dominated"] for v in verdicts)


def test_rerun_from_header(capsys, tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    code, _, _ = run(
        capsys, "psarea", "--matrix", "ginibre:6:2", "--ell", "2", "--eps", "0.1",
        "--samples", "20", "--seed", "4", "--out", str(out1),
    )
    assert code == 0
    code, _, _ = run(capsys, "psarea", "--config", str(out1), "--out", str(out2))
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# a comment\ncommand=numrange\nmatrix=jordan:3\nangles=8\n")
    code, out, _ = run(capsys, "--config", str(cfg))
    assert code == 0
    assert "# angles=8" in out
    assert len(rows(out)) == 9


def test_parse_error_line(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    code, _, err = run(capsys, "numrange", "--matrix", str(bad))
    assert code == 2
    assert "parse error: line 2" in err


def test_bad_generator(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["numrange", "--matrix", "nosuch:3"])
    assert exc.value.code == 2


def test_missing_file(capsys):
    code, _, err = run(capsys, "numrange", "--matrix", "/nonexistent/m.csv")
    assert code == 2


def test_verify_subset(capsys, monkeypatch):
    monkeypatch.setenv("WORKERS", "1")
    code, out, _ = run(capsys, "verify", "--suite", "net,a22", "--seed", "7")
    report = json.loads(out)
    assert code == 0
    assert set(report["suites"]) == {"a17", "a22"}
    assert report["all_pass"]


def test_verify_exit_code_on_failure(capsys, monkeypatch):
    monkeypatch.setenv("WORKERS", "1")
    monkeypatch.setitem(suites.SUITES, "broken", lambda gen: [CheckReport("broken", False, 1.0, 0.0, {})])
    code, out, _ = run(capsys, "verify", "--suite", "broken,a22")
    assert code == 1
    assert json.loads(out)["suites"]["broken"]["holds"] is False


def test_verify_crash_is_failure(monkeypatch):
    def boom(gen):
        raise RuntimeError("kaput")

    monkeypatch.setitem(suites.SUITES, "boom", boom)
    entry = suites.run_one("boom", 0)
    assert entry["holds"] is False and "kaput" in entry["error"]


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--suite", "zzz"])
    assert exc.value.code == 2


def test_fmt():
    assert cli.fmt(0.1) == "0.1"
    assert cli.fmt(float("inf")) == "inf"
    assert cli.fmt(float("nan")) == "nan"
    assert cli.fmt(True) == "true"


def test_suite_streams_reproducible():
    a = suites.suite_stream(7, "a22").standard_normal(4)
    b = suites.suite_stream(7, "a22").standard_normal(4)
    c = suites.suite_stream(7, "a24").standard_normal(4)
    assert np.array_equal(a, b) and not np.allclose(a, c)
    assert suites.resolve_suites("all") == list(suites.SUITES)
    assert suites.resolve_suites("corner53") == ["a53"]
