import json

from hypdiam.cli import main


def run_cli(args, capsys=None):
    code = main(args)
    return code


def test_hexagon_json(tmp_path):
    out = tmp_path / "hex.json"
    assert main(["hexagon", "--ell", "6.0", "--emit", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"ell", "s", "t", "c_ell", "c_prime", "rho", "pants_radius", "seam_length"}
    assert data["ell"] == 6.0
    # 12 significant digits
    assert data["c_ell"] == float(format(0.6010103213780813, ".12g"))


def test_lattice_csv(tmp_path):
    out = tmp_path / "lat.csv"
    assert main(["lattice", "--ell", "6", "--radius", "6.5", "--grid-step", "2", "--emit", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    header = json.loads(lines[0])
    assert header["command"] == "lattice"
    assert lines[1] == "R,N,shell,raw_rate,certified_upper,submult_ok,area_ok"
    assert len(lines) == 5


def test_graph_csv_disconnected_sentinel(tmp_path):
    out = tmp_path / "g.csv"
    # trial 39 of this seed is a disconnected sample
    assert main(["graph", "--genus", "3", "--trials", "40", "--seed", "123", "--emit", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[1] == "trial,connected,graph_diameter"
    froze = [ln for ln in lines[2:] if ln.endswith("false,inf")]
    conn = [ln for ln in lines[2:] if ",true," in ln]
    assert len(froze) >= 1
    assert len(froze) + len(conn) == 40


def test_surface_csv_and_determinism(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["surface", "--genus", "12", "--trials", "3", "--seed", "5"]
    assert main(args + ["--emit", str(a)]) == 0
    assert main(args + ["--emit", str(b)]) == 0
    assert main(args + ["--threads", "2", "--emit", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    lines = a.read_text().strip().split("\n")
    assert lines[1].startswith("trial,connected,midpoint_diam,padded_diam,bavard")
    assert all(ln.endswith(",0") for ln in lines[2:])  # wall_ms suppressed


def test_peel_csv(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["peel", "--genus", "16", "--trials", "2", "--seed", "4", "--emit", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[1] == "trial,bad_phase1,bad_phase2,R_6k,R_tau1,R_tau2,closed_early,audit_pass,audit_slack_min"


def test_verify_exit_code(tmp_path):
    out = tmp_path / "v.txt"
    code = main(["verify", "--suite", "geometry", "--emit", str(out)])
    assert code == 0
    assert "overall: pass" in out.read_text()


def test_sweep_with_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"genus": [8], "trials": 2, "seed": 3}))
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--emit", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    header = json.loads(lines[0])
    assert header["config"]["genus"] == [8]
    assert lines[1].startswith("genus,ell,trial,seed,connected")
    err = capsys.readouterr().err
    assert "summary" in err


def test_bad_input_reports_error(capsys, tmp_path):
    code = main(["hexagon", "--ell", "100.0", "--emit", str(tmp_path / "x.json")])
    assert code == 2
    assert "error" in capsys.readouterr().err
