import json

import pytest

from labelpart import bench, cli
from labelpart.bench import CSV_HEADER, BenchRecord, CorrectnessError, emit_csv, format_csv, medians, run_benchmark
from labelpart.datagen import DatasetSpec, read_dump
from labelpart.joins import JoinMethod, get_method
from labelpart.label_grouping import PartitionLoopConfig
from labelpart.two_layer_join import AdjacencyMap


def rec(i=0, threads=1):
    return BenchRecord("two-layer", 100, 10, i, 0.5, 0.25, 0.75, 12, 3, 4, threads)


def test_csv_one_record():
    text = format_csv([rec()])
    assert text.splitlines() == [CSV_HEADER, "two-layer,100,10,0,0.500000000,0.250000000,0.750000000,12,3,4"]


def test_csv_header_bytes_and_line_count(tmp_path):
    path = emit_csv([rec(i) for i in range(15)], tmp_path / "o.csv")
    data = path.read_bytes()
    assert data.startswith(b"method,n_objects,grid_tiles,repeat,build_s,query_s,total_s,tests,groups,max_group\n")
    assert data.count(b"\n") == 16


def test_csv_threads_column():
    lines = format_csv([rec(0, 4), rec(1, 4)]).splitlines()
    assert lines[0] == CSV_HEADER + ",threads" and lines[1].endswith(",4")


def test_csv_errors(tmp_path):
    with pytest.raises(ValueError):
        format_csv([])
    with pytest.raises(OSError, match="nowhere"):
        emit_csv([rec()], tmp_path / "nowhere" / "o.csv")


def test_ten_k_three_methods_five_repeats():
    recs = run_benchmark([DatasetSpec(10_000, seed=2)], ["two-layer", "ig", "rtree"], 100, 5)
    assert len(recs) == 15
    assert len({(r.groups, r.max_group_size) for r in recs}) == 1
    for r in recs:
        assert r.total_time >= r.build_time + r.query_time - 1e-6
        assert min(r.build_time, r.query_time, r.intersection_tests) >= 0
    tests = {r.method: r.intersection_tests for r in recs}
    assert tests["two-layer"] <= tests["ig"]
    m = medians(recs)
    assert set(m) == {("two-layer", 10_000), ("ig", 10_000), ("rtree", 10_000)}


def test_brute_included_all_agree():
    recs = run_benchmark([DatasetSpec(100, seed=1)], ["brute", "two-layer", "ig", "rtree"], 10)
    assert [r.method for r in recs] == ["brute", "two-layer", "ig", "rtree"]
    assert recs[0].intersection_tests == 4950


def test_brute_cap_skips(caplog):
    recs = run_benchmark([DatasetSpec(300, seed=1)], ["brute", "two-layer"], 10, brute_cap=200)
    assert [r.method for r in recs] == ["two-layer"]
    assert "brute cap" in caplog.text


def test_gaussian_mode_cell():
    spec = DatasetSpec(2000, domain=DatasetSpec(1).domain, seed=3, mode="gaussian")
    recs = run_benchmark([spec], ["two-layer", "ig"], 50, 1, loop_cfg=PartitionLoopConfig(2))
    assert recs[0].groups == recs[1].groups and recs[0].max_group_size <= 2


def test_bench_rejects_bad_args():
    with pytest.raises(ValueError):
        run_benchmark([DatasetSpec(10)], ["kd-tree"])
    with pytest.raises(ValueError):
        run_benchmark([DatasetSpec(10)], repeats=0)


def _drop_one_edge(monkeypatch):
    real = get_method("ig")

    def query(index, counters, threads):
        adj = real.query(index, counters, threads)
        d = adj.to_dict()
        a = next(k for k, v in d.items() if v)
        b = d[a].pop()
        d[b].discard(a)
        return AdjacencyMap.from_mapping(d)

    broken = JoinMethod("ig", real.build, query)
    monkeypatch.setattr(bench, "get_method", lambda n: broken if n == "ig" else get_method(n))


def test_correctness_gate_blocks_records(monkeypatch):
    _drop_one_edge(monkeypatch)
    with pytest.raises(CorrectnessError, match="ig disagrees with two-layer"):
        run_benchmark([DatasetSpec(3000, seed=1)], ["two-layer", "ig"], 20)


# -- CLI ---------------------------------------------------------------------


def test_cli_bench_writes_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    rc = cli.main(["bench", "--n-sweep", "1k:2k:1k", "--methods", "two-layer,ig,brute",
                   "--grid-tiles", "20", "--repeats", "2", "--out", str(out), "--dump-dir", str(tmp_path)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER and len(lines) == 1 + 2 * 3 * 2
    assert (tmp_path / "rects_n1000_s0.txt").exists()


def test_cli_bench_stdout_and_threads(capsys):
    assert cli.main(["bench", "--n", "500", "--grid-tiles", "10", "--threads", "2", "--methods", "two-layer"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == CSV_HEADER + ",threads"


def test_cli_bench_exit_code_on_mismatch(monkeypatch, capsys):
    _drop_one_edge(monkeypatch)
    rc = cli.main(["bench", "--n", "3000", "--grid-tiles", "20", "--methods", "two-layer,ig"])
    assert rc == 2
    assert "correctness gate failed" in capsys.readouterr().err


def test_cli_gen_and_join(tmp_path):
    dump = tmp_path / "d.txt"
    assert cli.main(["gen", "--n", "300", "--seed", "4", "--area-m", "100", "--max-extent-m", "8", "--out", str(dump)]) == 0
    rects, seed = read_dump(dump)
    assert seed == 4 and len(rects) == 300
    outs = []
    for m in ("two-layer", "brute"):
        out = tmp_path / f"{m}.txt"
        assert cli.main(["join", "--dataset", str(dump), "--area-m", "100", "--grid-tiles", "7",
                         "--method", m, "--out", str(out)]) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]
    first = outs[0].splitlines()[0]
    assert first.startswith("0:")


def test_cli_partition(tmp_path):
    out = tmp_path / "p.json"
    assert cli.main(["partition", "--n", "3000", "--lmax", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["valid"] and not doc["fallback"] and max(len(g) for g in doc["groups"]) <= 3
    assert sorted(x for g in doc["groups"] for x in g) == list(range(3000))
    pgs = [s["pg"] for s in doc["trace"]]
    assert pgs[0] == 0.9973 and pgs == sorted(pgs, reverse=True)


def test_cli_partition_dense_falls_back(tmp_path):
    out = tmp_path / "p.json"
    assert cli.main(["partition", "--n", "3000", "--lmax", "3", "--area-m", "500", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["fallback"] and not doc["valid"] and "[fallback split]" in doc["report"]
    assert max(len(g) for g in doc["groups"]) <= 3


@pytest.mark.parametrize("argv", [
    ["bench", "--n", "0"],
    ["bench", "--n-sweep", "5:1:1"],
    ["bench", "--methods", "kd"],
    ["bench", "--n", "ten"],
])
def test_cli_argument_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_cli_value_errors_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen", "--n", "10", "--max-extent-m", "5000", "--out", str(tmp_path / "x")])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen", "--n", "10", "--out", str(tmp_path / "no" / "x")])
    assert exc.value.code == 1
    assert "no" in capsys.readouterr().err


def test_cli_partition_needs_lmax():
    with pytest.raises(SystemExit):
        cli.main(["partition", "--n", "10"])


def test_parse_count():
    assert cli.parse_count("10k") == 10_000
    assert cli.parse_count("1.5m") == 1_500_000
    assert cli.parse_sweep("10k:30k:10k") == [10_000, 20_000, 30_000]
