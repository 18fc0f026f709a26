import json

from sweepout.cli import EXIT_CERT, EXIT_INPUT, EXIT_OK, EXIT_RES, build_parser, run_command
from sweepout.report import read_ply_regions
from sweepout.surface import flat_torus, write_off


def run(argv, capsys):
    code = run_command(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_constants(capsys):
    code, out, _ = run(["constants"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["pass"] and d["constants"]["C(1)"] == 345


def test_tree_verify(capsys, tmp_path):
    code, _, _ = run(["tree-verify", "--lambda", "0.25", "--xmax", "4", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["points"] == 7 and d["config"]["subcommand"] == "tree-verify"


def test_slice_with_ply(capsys, tmp_path):
    ply = tmp_path / "s.ply"
    code, out, _ = run(["slice", "--generate", "torus:40", "--disk", "0.1", "-r", "0.1", "--ply", str(ply)], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["slice"]["cut_length_g"] > 0
    nf, ids = read_ply_regions(ply)
    assert set(ids.tolist()) == {0, 1}


def test_thin_and_thick(capsys):
    code, out, _ = run(["thin", "--generate", "torus:30", "-r", "0.1", "--alpha", "0.04",
                        "--centers", "4", "--radii", "4"], capsys)
    assert code == EXIT_OK and json.loads(out)["thin"]["pieces"] > 1
    code, out, _ = run(["thick", "--generate", "torus:30", "-k", "10000"], capsys)
    assert code == EXIT_OK and json.loads(out)["thick"]["leaves"] >= 4


def test_decompose_from_files(capsys, tmp_path):
    s = flat_torus(6)
    mesh = tmp_path / "t.off"
    write_off(mesh, s.positions, s.faces)
    phi = tmp_path / "phi.txt"
    phi.write_text("\n".join(["0.0"] * s.n_vertices))
    # the embedded ring torus is curved, so paper mode hits the resolution limit
    code, _, err = run(["decompose", "--mesh", str(mesh), "--phi", str(phi), "-k", "4", "--mode", "paper",
                        "--out", str(tmp_path / "o")], capsys)
    assert code == EXIT_RES and err.startswith("RES-ERR")
    d = json.loads((tmp_path / "o" / "report.json").read_text())
    assert d["pass"] and any("C3" in c["name"] for c in d["certificates"])


def test_decompose_is_deterministic(capsys, tmp_path):
    argv = ["decompose", "--generate", "torus:30", "-k", "50", "--centers", "4", "--radii", "4"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["--out", str(a)], capsys)[0] == EXIT_OK
    assert run(argv + ["--out", str(b)], capsys)[0] == EXIT_OK
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_curve(capsys):
    code, out, _ = run(["curve", "--generate", "torus:30", "--k-list", "10,40", "--centers", "4", "--radii", "4"],
                       capsys)
    d = json.loads(out)
    assert code == EXIT_OK and len(d["rows"]) == 2 and 0 < d["slope"] < 1


def test_cert_failure_exit(capsys):
    # alpha far below the ball areas: the thin hypothesis fails before decomposing
    code, _, err = run(["thin", "--generate", "torus:20", "-r", "0.1", "--alpha", "1e-6", "--mode", "paper"], capsys)
    assert code == EXIT_INPUT and err.startswith("INPUT-ERR")


def test_input_errors(capsys, tmp_path):
    code, _, err = run(["slice", "--mesh", str(tmp_path / "none.off"), "--disk", "0.1", "-r", "0.1"], capsys)
    assert code == EXIT_INPUT and "not found" in err
    code, _, _ = run(["decompose", "--generate", "torus:x", "-k", "3"], capsys)
    assert code == EXIT_INPUT
    code, _, _ = run(["curve", "--generate", "torus:10", "--k-list", "3,2"], capsys)
    assert code == EXIT_INPUT
    code, _, _ = run(["bogus"], capsys)
    assert code == EXIT_INPUT
    code, _, _ = run(["slice", "--generate", "torus:10", "--center", "99999", "--disk", "0.1", "-r", "0.1"], capsys)
    assert code == EXIT_INPUT


def test_cert_fail_prefix(capsys, monkeypatch):
    import sweepout.cli as cli
    from sweepout.certificates import check

    monkeypatch.setattr(cli, "constant_chain", lambda b: [check("forced", 2.0, 1.0)])
    code, _, err = run(["constants"], capsys)
    assert code == EXIT_CERT and err.startswith("CERT-FAIL: 1 certificate(s) failed: forced")


def test_parser_lists_subcommands():
    text = build_parser().format_help()
    for name in ("constants", "tree-verify", "slice", "thin", "thick", "decompose", "curve"):
        assert name in text
