import csv

import pytest

from stabsim.cli import main


def test_run_writes_trace_and_summary(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main([
        "run", "--graph", "ring:4", "--daemon", "central-rand",
        "--seed", "3", "--init", "random:1:11", "--out", str(out),
    ])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "# effective-spec" in captured
    traces = list(out.glob("trace-*.txt"))
    assert len(traces) == 1
    text = traces[0].read_text()
    assert text.startswith("# stabsim trace v1")
    assert "reason" in text
    with (out / "summary.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert set(rows[0]) == {
        "graph", "protocol", "daemon", "seed", "init_hash",
        "conv_me", "conv_au", "violations", "steps", "reason",
    }


def test_summary_append_is_schema_stable(tmp_path):
    out = tmp_path / "out"
    for seed in ("1", "2"):
        rc = main([
            "run", "--graph", "path:3", "--seed", seed,
            "--init", "random:1:5", "--out", str(out),
        ])
        assert rc == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 3  # one header + two rows
    assert lines[0] == (
        "graph,protocol,daemon,seed,init_hash,conv_me,conv_au,"
        "violations,steps,reason"
    )


def test_run_is_byte_deterministic(tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = main([
            "run", "--graph", "ring:5", "--daemon", "dist-rand",
            "--prob", "0.4", "--seed", "21", "--init", "random:1:8",
            "--out", str(out),
        ])
        assert rc == 0
        (trace,) = out.glob("trace-*.txt")
        outs.append(trace.read_bytes())
    assert outs[0] == outs[1]


def test_run_witness_init_two_privileged(tmp_path, capsys):
    out = tmp_path / "o"
    rc = main([
        "run", "--graph", "path:2", "--init", "witness", "--out", str(out),
    ])
    assert rc == 0
    text = capsys.readouterr().out
    assert "conv_me=1" in text


def test_run_missing_graph_file_exits_2(tmp_path, capsys):
    rc = main(["run", "--graph", "file:/no/such.g", "--out", str(tmp_path)])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_run_init_file(tmp_path, capsys):
    cfg = tmp_path / "init.cfg"
    cfg.write_text("4\n6\n")
    rc = main([
        "run", "--graph", "path:2", "--init", f"file:{cfg}",
        "--out", str(tmp_path / "o"),
    ])
    assert rc == 0
    assert "conv_me=1" in capsys.readouterr().out


def test_run_init_file_wrong_length(tmp_path, capsys):
    cfg = tmp_path / "init.cfg"
    cfg.write_text("1\n2\n3\n")
    rc = main([
        "run", "--graph", "path:2", "--init", f"file:{cfg}",
        "--out", str(tmp_path / "o"),
    ])
    assert rc == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "exp.conf"
    conf.write_text("graph ring:5\nseed 9\ndaemon central-rr\n")
    rc = main([
        "run", "--config", str(conf), "--seed", "4",
        "--out", str(tmp_path / "o"), "--init", "random:1:2",
    ])
    assert rc == 0
    text = capsys.readouterr().out
    assert "graph=ring:5" in text      # from file
    assert "seed=4" in text            # flag wins
    assert "daemon=central-rr" in text


def test_sweep(tmp_path, capsys):
    out = tmp_path / "o"
    rc = main([
        "sweep", "--graph", "path:3", "--daemon", "dist-rand",
        "--init", "random:4:1", "--seeds", "2", "--out", str(out),
    ])
    assert rc == 0
    with (out / "summary.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    hashes = [(r["init_hash"], r["seed"]) for r in rows]
    assert hashes == sorted(hashes)


def test_sweep_json_lines(tmp_path):
    out = tmp_path / "o"
    rc = main([
        "sweep", "--graph", "path:2", "--init", "random:2:1",
        "--format", "json-lines", "--out", str(out),
    ])
    assert rc == 0
    lines = (out / "summary.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert all(line.startswith("{") for line in lines)


def test_verify_clock_passes(capsys):
    assert main(["verify", "clock"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_closure_exhaustive_path2(capsys):
    assert main(["verify", "closure", "--graph", "path:2", "--exhaustive"]) == 0


def test_verify_lemmas_sampled(capsys):
    rc = main([
        "verify", "lemmas", "--graph", "ring:4", "--samples", "400",
        "--seed", "7",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4


def test_verify_bounds_path2(capsys):
    rc = main(["verify", "bounds", "--graph", "path:2", "--exhaustive"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_witness_command(tmp_path, capsys):
    out = tmp_path / "o"
    rc = main(["witness", "--graph", "ring:8", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "convergence 2" in text
    assert "target 2" in text
    vals = [int(x) for x in (out / "witness.cfg").read_text().split()]
    assert len(vals) == 8


def test_compare_small(tmp_path, capsys):
    out = tmp_path / "o"
    rc = main([
        "compare", "--graphs", "ring:3", "--samples", "50",
        "--out", str(out),
    ])
    assert rc == 0
    with (out / "compare.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert {r["protocol"] for r in rows} == {"ssme", "dijkstra"}
    for row in rows:
        assert float(row["unfair_worst"]) >= float(row["sync_worst"])


def test_unknown_daemon_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--daemon", "chaotic"])
    assert exc.value.code == 2
