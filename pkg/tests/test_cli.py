"""Command-line interface, run in process via main(argv)."""

import json

import pytest

from powlgen.cli import main
from powlgen.pcl import run_pcl
from powlgen.serialize import pnml_import, powl_json_import

from story import BASELINE, BROKEN, LOOPED, FEEDBACK_LOOP, fenced, \
    has_loop_with_activity


@pytest.fixture()
def script(tmp_path):
    def write(*replies):
        path = tmp_path / "replies.json"
        path.write_text(json.dumps(list(replies)), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture()
def description_file(tmp_path):
    path = tmp_path / "description.txt"
    path.write_text("handle the customer order", encoding="utf-8")
    return str(path)


@pytest.fixture()
def model_file(tmp_path):
    path = tmp_path / "model.pcl"
    path.write_text(BASELINE + "\n", encoding="utf-8")
    return str(path)


class TestGenerate:
    def test_writes_export_and_summary(self, tmp_path, script,
                                       description_file, capsys):
        out = tmp_path / "model.pnml"
        code = main(["generate", "--description", description_file,
                     "--mock-script", script(fenced(BASELINE)),
                     "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr()
        assert "model generated after 1 attempt(s)" in captured.out
        assert "6 activities" in captured.out
        net = pnml_import(out.read_text(encoding="utf-8"))
        assert len(net.transitions) > 0

    def test_reads_stdin_description(self, tmp_path, script, capsys,
                                     monkeypatch):
        import io
        monkeypatch.setattr("sys.stdin", io.StringIO("a tiny process"))
        code = main(["generate", "--description", "-",
                     "--mock-script", script(fenced(BASELINE))])
        assert code == 0

    def test_session_dir_saved(self, tmp_path, script, description_file):
        session_dir = tmp_path / "session"
        code = main(["generate", "--description", description_file,
                     "--mock-script", script(fenced(BASELINE)),
                     "--session", str(session_dir)])
        assert code == 0
        assert (session_dir / "session.json").exists()
        assert (session_dir / "model.pcl").exists()

    def test_refuses_to_overwrite_session(self, tmp_path, script,
                                          description_file, capsys):
        session_dir = tmp_path / "session"
        main(["generate", "--description", description_file,
              "--mock-script", script(fenced(BASELINE)),
              "--session", str(session_dir)])
        code = main(["generate", "--description", description_file,
                     "--mock-script", script(fenced(BASELINE)),
                     "--session", str(session_dir)])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_exhaustion_reports_error(self, tmp_path, script,
                                      description_file, capsys):
        code = main(["generate", "--description", description_file,
                     "--mock-script", script(*[fenced(BROKEN)] * 5)])
        assert code == 1
        err = capsys.readouterr().err
        assert "error:" in err
        assert "'pay'" in err

    def test_missing_description_file(self, script, capsys):
        code = main(["generate", "--description", "/nonexistent/d.txt",
                     "--mock-script", script("x")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestRefine:
    def test_updates_session_model(self, tmp_path, script, description_file,
                                   capsys):
        session_dir = tmp_path / "session"
        main(["generate", "--description", description_file,
              "--mock-script", script(fenced(BASELINE)),
              "--session", str(session_dir)])
        out = tmp_path / "refined.powl.json"
        code = main(["refine", "--session", str(session_dir),
                     "--feedback", FEEDBACK_LOOP,
                     "--mock-script", script(fenced(LOOPED)),
                     "--out", str(out)])
        assert code == 0
        assert "refined" in capsys.readouterr().out
        model = powl_json_import(out.read_text(encoding="utf-8"))
        assert has_loop_with_activity(model, "select item")
        # the stored source now reparses to the refined model
        stored = (session_dir / "model.pcl").read_text(encoding="utf-8")
        assert run_pcl(stored) == model

    def test_missing_session(self, tmp_path, script, capsys):
        code = main(["refine", "--session", str(tmp_path / "ghost"),
                     "--feedback", "x", "--mock-script", script("y")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestConvert:
    def test_pcl_to_pnml_stdout(self, model_file, capsys):
        code = main(["convert", "--in", model_file, "--to", "pnml"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("<?xml")
        pnml_import(out)

    def test_pcl_to_powl_json_file(self, model_file, tmp_path):
        out = tmp_path / "model.powl.json"
        code = main(["convert", "--in", model_file, "--to", "powl-json",
                     "--out", str(out)])
        assert code == 0
        model = powl_json_import(out.read_text(encoding="utf-8"))
        assert model == run_pcl(BASELINE)

    def test_json_to_pcl_roundtrip(self, model_file, tmp_path, capsys):
        json_file = tmp_path / "model.powl.json"
        main(["convert", "--in", model_file, "--to", "powl-json",
              "--out", str(json_file)])
        capsys.readouterr()
        code = main(["convert", "--in", str(json_file), "--to", "pcl"])
        assert code == 0
        assert run_pcl(capsys.readouterr().out) == run_pcl(BASELINE)

    def test_bpmn_output(self, model_file, capsys):
        code = main(["convert", "--in", model_file, "--to", "bpmn"])
        assert code == 0
        assert "definitions" in capsys.readouterr().out

    def test_invalid_program_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.pcl"
        bad.write_text(BROKEN, encoding="utf-8")
        code = main(["convert", "--in", str(bad), "--to", "pnml"])
        assert code == 1
        err = capsys.readouterr().err
        assert "error:" in err
        assert "undefined-ident" in err


class TestCheck:
    def test_sound_model(self, model_file, capsys):
        code = main(["check", "--in", model_file])
        assert code == 0
        assert capsys.readouterr().out.strip() == "sound, 0 dead transitions"

    def test_invalid_program_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.pcl"
        bad.write_text("final(missing)", encoding="utf-8")
        code = main(["check", "--in", str(bad)])
        assert code == 1


class TestOracle:
    def test_sorted_traces_with_count_on_stderr(self, tmp_path, capsys):
        path = tmp_path / "po.pcl"
        path.write_text('a = activity("a")\n'
                        'b = activity("b")\n'
                        'p = partial_order([a, b], [])\n'
                        'final(p)\n', encoding="utf-8")
        code = main(["oracle", "--in", str(path)])
        assert code == 0
        captured = capsys.readouterr()
        assert captured.out.splitlines() == ["a, b", "b, a"]
        assert "2 trace(s)" in captured.err

    def test_empty_trace_marker(self, tmp_path, capsys):
        path = tmp_path / "s.pcl"
        path.write_text("s = silent()\nfinal(s)\n", encoding="utf-8")
        code = main(["oracle", "--in", str(path)])
        assert code == 0
        assert capsys.readouterr().out.strip() == "<empty>"

    def test_max_len_truncates(self, tmp_path, capsys):
        path = tmp_path / "loop.pcl"
        path.write_text('a = activity("a")\n'
                        'b = activity("b")\n'
                        'l = loop(a, b)\n'
                        'final(l)\n', encoding="utf-8")
        code = main(["oracle", "--in", str(path), "--max-len", "3"])
        assert code == 0
        assert capsys.readouterr().out.splitlines() == ["a", "a, b, a"]


class TestArgumentErrors:
    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit):
            main(["frobnicate"])

    def test_http_provider_needs_endpoint(self, description_file, capsys):
        code = main(["generate", "--description", description_file,
                     "--provider", "http"])
        assert code == 1
        assert "error:" in capsys.readouterr().err
