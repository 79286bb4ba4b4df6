import json
import pathlib

import pytest

from geograms import cli, metrics
from geograms.encoding import decode_paths
from geograms.store import load_ntriples

from conftest import FIXTURES, read_fixture

GOLDEN = pathlib.Path(__file__).parent / "golden"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def graph_args():
    return ["--graph", str(FIXTURES / "social.nt")]


def test_metric_shortest_path_researcher_golden(capsys):
    code, out, _ = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path.pg"),
        "--metric", "shortest-path", "--output", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["wall_time_ms"] >= 0
    payload["wall_time_ms"] = 0
    golden = json.loads((GOLDEN / "metric_researcher.json").read_text())
    assert payload == golden


def test_metric_shortest_path_any_path_golden(capsys):
    code, out, _ = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(FIXTURES / "any_path.pg"),
        "--metric", "shortest-path", "--output", "json",
    )
    assert code == 0
    payload = json.loads(out)
    payload["wall_time_ms"] = 0
    golden = json.loads((GOLDEN / "metric_any_path.json").read_text())
    assert payload == golden


def test_metric_text_output(capsys):
    code, out, _ = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path.pg"),
        "--metric", "shortest-path",
    )
    assert code == 0
    assert out.splitlines()[0] == "shortest-path = 2"


def test_metric_with_vertex_universe(capsys):
    code, out, _ = run_cli(
        capsys,
        "metric", *graph_args(),
        "--graph", str(FIXTURES / "social.nt"),
        "--grammar", str(FIXTURES / "any_path.pg"),
        "--metric", "eccentricity", "--vertex", "lanl:johan",
        "--vertices", "lanl:johan", "--vertices", "lanl:marko",
        "--vertices", "lanl:jhw", "--vertices", "lanl:norman",
        "--output", "json",
    )
    assert code == 0
    assert json.loads(out)["value"] == 2


def test_metric_requires_vertex_for_eccentricity(capsys):
    code, _, err = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(FIXTURES / "any_path.pg"),
        "--metric", "eccentricity",
    )
    assert code == 1
    assert "requires --vertex" in err


def test_paths_all_mode(capsys):
    code, out, _ = run_cli(
        capsys,
        "paths", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path.pg"),
        "--mode", "all", "--output", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 2
    assert payload["edge_lengths"] == [3, 2]


def test_paths_encode_out_round_trips(capsys, tmp_path):
    out_file = tmp_path / "encoded.nt"
    code, out, _ = run_cli(
        capsys,
        "paths", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path.pg"),
        "--encode-out", str(out_file), "--output", "json",
    )
    assert code == 0
    store = load_ntriples(out_file.read_text())
    records = decode_paths(store)
    assert sorted(r.edge_length for r in records) == [2, 3]


def test_encode_command(capsys, tmp_path):
    out_file = tmp_path / "store.nt"
    code, out, _ = run_cli(
        capsys,
        "encode", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path.pg"),
        "--out", str(out_file), "--output", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["records"] == 2
    assert len(load_ntriples(out_file.read_text())) == payload["triples"]


def test_validate_grammar_ok(capsys):
    code, out, _ = run_cli(
        capsys, "validate-grammar", "--grammar", str(FIXTURES / "researcher_path.pg")
    )
    assert code == 0
    assert out.strip() == "ok"


def test_validate_grammar_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.pg"
    bad.write_text(
        read_fixture("researcher_path.pg").replace(
            "context johan_0 entry for lanl:johan {",
            "context johan_0 entry for lanl:johan {\n  notever",
        )
    )
    code, out, _ = run_cli(capsys, "validate-grammar", "--grammar", str(bad))
    assert code == 2
    assert "error johan_0" in out


def test_validate_grammar_warning_exit_0(capsys, tmp_path):
    hazardous = tmp_path / "hazard.pg"
    hazardous.write_text(read_fixture("any_path.pg").replace("notever\n", ""))
    code, out, _ = run_cli(capsys, "validate-grammar", "--grammar", str(hazardous))
    assert code == 0
    assert "warning" in out


def test_oracle_check_passes_on_fixture(capsys):
    code, out, _ = run_cli(
        capsys, "oracle-check", *graph_args(), "--output", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["pairs"] == 20 and payload["mismatches"] == []


def test_oracle_check_reports_mismatch(capsys, monkeypatch):
    real = metrics.unlabeled_oracle_geodesics

    def skewed(graph, source, target, schema_namespaces=metrics.DEFAULT_SCHEMA_NAMESPACES):
        value = real(graph, source, target, schema_namespaces)
        return None if value is None else value + 1

    monkeypatch.setattr(metrics, "unlabeled_oracle_geodesics", skewed)
    code, out, _ = run_cli(capsys, "oracle-check", *graph_args(), "--output", "json")
    assert code == 3
    assert json.loads(out)["mismatches"]


def test_usage_error_exit_1(capsys):
    code, _, err = run_cli(capsys, "metric", "--metric", "shortest-path")
    assert code == 1
    assert "usage error" in err


def test_missing_file_exit_2(capsys):
    code, _, err = run_cli(
        capsys,
        "metric", "--graph", "no-such-file.nt",
        "--grammar", str(FIXTURES / "any_path.pg"),
        "--metric", "shortest-path",
    )
    assert code == 2
    assert "error" in err


def test_grammar_parse_error_exit_2(capsys, tmp_path):
    mangled = tmp_path / "mangled.pg"
    mangled.write_text("context ! nope\n")
    code, _, err = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(mangled), "--metric", "shortest-path",
    )
    assert code == 2


def test_env_var_overrides_max_steps(capsys, monkeypatch, tmp_path):
    cyclic = tmp_path / "cyclic.nt"
    cyclic.write_text(
        "@prefix ex: <http://example.org/t#> .\n"
        "ex:a ex:p ex:b .\nex:b ex:p ex:c .\nex:c ex:p ex:a .\nex:x ex:p ex:y .\n"
    )
    hazardous = tmp_path / "hazard.pg"
    hazardous.write_text(
        "@prefix ex: <http://example.org/t#>\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
        "context e entry for ex:a {\n  pathcount 0\n"
        "  traverse out ex:p -> H, out ex:p -> sink\n}\n"
        "context H for rdfs:Resource {\n  pathcount 0\n"
        "  traverse out ex:p -> H, out ex:p -> sink\n}\n"
        "context sink exit for ex:x {\n  pathcount 0\n}\n"
    )
    monkeypatch.setenv(cli.ENV_MAX_STEPS, "9")
    code, _, err = run_cli(
        capsys,
        "paths", "--graph", str(cyclic), "--grammar", str(hazardous),
    )
    assert code == 2
    assert "9 generations" in err


def test_grammar_triple_format_inferred_from_extension(capsys):
    code, out, _ = run_cli(
        capsys,
        "metric", *graph_args(),
        "--grammar", str(FIXTURES / "researcher_path_grammar.nt"),
        "--metric", "shortest-path", "--output", "json",
    )
    assert code == 0
    assert json.loads(out)["value"] == 2


def test_threads_flag_output_identical(capsys):
    outputs = []
    for threads in ("1", "4", "8"):
        code, out, _ = run_cli(
            capsys,
            "paths", *graph_args(),
            "--grammar", str(FIXTURES / "researcher_path.pg"),
            "--output", "json", "--threads", threads,
        )
        assert code == 0
        payload = json.loads(out)
        payload.pop("wall_time_ms")
        outputs.append(json.dumps(payload))
    assert outputs[0] == outputs[1] == outputs[2]
