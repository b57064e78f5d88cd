import pytest

from dirac_bubbles import progress


@pytest.fixture(autouse=True)
def reset_log_file():
    yield
    progress.configure(None)


def test_format_keeps_essential_keys():
    line = progress.format_line("fields.killing.n2", "passed",
                                {"measured": 0.0, "passed": True, "identity": "long text", "runtime": 1.5})
    assert "[CHECK fields.killing.n2] passed: " in line
    assert '"measured":0.0' in line
    assert "identity" not in line
    assert "runtime" not in line


def test_format_without_data():
    assert progress.format_line("a", "started").endswith("[CHECK a] started")
    assert progress.format_line("a", "started", {"runtime": 2}).endswith("[CHECK a] started")


def test_log_goes_to_file_and_stderr(tmp_path, capsys):
    path = tmp_path / "progress.log"
    progress.configure(path)
    progress.log_check("a", "started", {"dimension": 3})
    progress.log_error("a", ValueError("bad grid"))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert '"dimension":3' in lines[0]
    assert "ERROR" in lines[1] and "bad grid" in lines[1]
    assert capsys.readouterr().err.count("🔄") == 2


def test_unwritable_log_falls_back_to_stderr(tmp_path, capsys):
    progress.configure(tmp_path)
    progress.log_check("a", "passed", {"passed": True})
    assert "[PROGRESS-LOG-ERROR]" in capsys.readouterr().err


def test_clear(tmp_path):
    path = tmp_path / "progress.log"
    path.write_text("old\n", encoding="utf-8")
    progress.configure(path)
    progress.clear_progress_log()
    assert not path.exists()
