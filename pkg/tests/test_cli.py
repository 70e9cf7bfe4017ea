import csv
import json
import os

import pytest

from strongnash import FORMAT_VERSION, __version__
from strongnash.cli import EXIT_ABORTED, EXIT_IO, EXIT_NONE, EXIT_OK, EXIT_USAGE, main
from strongnash.game import MixedProfile, load_game, save_game, save_profile
from strongnash.hard import gen_block_even

from conftest import COORD, LINE_GAME, PD, THREE_AGENT


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, g in [("line", LINE_GAME), ("pd", PD), ("coord", COORD), ("three", THREE_AGENT),
                    ("block4", gen_block_even(4))]:
        paths[name] = str(tmp_path / f"{name}.game")
        save_game(g, paths[name])
    paths["sne"] = str(tmp_path / "sne.json")
    save_profile(MixedProfile(([0.25, 0.75], [0.5, 0.5])), paths["sne"])
    paths["pure"] = str(tmp_path / "pure.json")
    save_profile(MixedProfile.pure((2, 2), (1, 1)), paths["pure"])
    paths["dir"] = str(tmp_path)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_line_game_json(files, capsys):
    code, out, _ = run(capsys, "solve", files["line"], "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["status"] == "Found" and doc["phase"] == 3
    assert doc["profile"] == [pytest.approx([0.25, 0.75], abs=1e-12), pytest.approx([0.5, 0.5], abs=1e-12)]
    assert "wall_time" not in doc["stats"]


def test_solve_text_and_exit_codes(files, capsys):
    code, out, _ = run(capsys, "solve", files["pd"])
    assert code == EXIT_NONE and "NonExistence" in out
    code, out, _ = run(capsys, "solve", files["coord"])
    assert code == EXIT_OK and "phase 1" in out
    code, out, _ = run(capsys, "solve", files["three"])
    assert code == 4 and "ruled out: no" in out
    code, out, _ = run(capsys, "solve", files["block4"], "--budget", "3", "--json")
    assert code == EXIT_ABORTED and json.loads(out)["status"] == "Aborted"


def test_json_byte_identical(files, capsys):
    outs = {run(capsys, "--threads", t, "solve", files["block4"], "--json")[1] for t in ("1", "2")}
    outs.add(run(capsys, "solve", files["block4"], "--json", "--threads", "3")[1])
    assert len(outs) == 1


def test_verify(files, capsys):
    code, out, _ = run(capsys, "verify", files["line"], files["sne"], "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["status"] == "SNE" and doc["nash"]
    assert doc["coalitions"]["0,1"]["correlated"] == "efficient"
    code, out, _ = run(capsys, "verify", files["pd"], files["pure"])
    assert code == EXIT_NONE and "NotSNE" in out


def test_gen_hard_then_solve(files, capsys):
    out_game = os.path.join(files["dir"], "g.game")
    code, _, _ = run(capsys, "gen-hard", "--m", "8", "--mbar", "4", "--seed", "1", "--out", out_game)
    assert code == EXIT_OK and os.path.exists(out_game + ".sne.json")
    code, out, _ = run(capsys, "solve", out_game, "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["profile"] == [pytest.approx([0.25] * 4 + [0.0] * 4, abs=1e-12)] * 2
    code, _, _ = run(capsys, "verify", out_game, out_game + ".sne.json")
    assert code == EXIT_OK


def test_perturb_and_bench(files, capsys):
    out_game = os.path.join(files["dir"], "p.game")
    code, _, _ = run(capsys, "perturb", files["block4"], "--sigma", "0.01", "--seed", "3",
                     "--model", "gaussian", "--out", out_game)
    assert code == EXIT_OK and load_game(out_game).actions == (8, 8)
    assert run(capsys, "solve", out_game)[0] == EXIT_NONE
    out_csv = os.path.join(files["dir"], "b.csv")
    code, out, _ = run(capsys, "bench", "--m", "6", "--mbar", "3", "--sigma", "0.05",
                       "--trials", "4", "--csv", out_csv, "--json")
    assert code == EXIT_OK and json.loads(out)["trials"] == 4
    with open(out_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert list(rows[0]) == ["trial", "phase", "supports_enumerated", "wall_time", "status"]


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out and f"format {FORMAT_VERSION}" in out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["solve"],
    ["solve", "x.game", "--eps", "0"],
    ["solve", "x.game", "--eps", "abc"],
    ["solve", "x.game", "--threads", "0"],
    ["solve", "x.game", "--unknown"],
    ["perturb", "x.game", "--sigma", "-1", "--out", "y"],
    ["perturb", "x.game", "--sigma", "0.1", "--model", "cauchy", "--out", "y"],
    ["gen-hard", "--m", "8", "--mbar", "4", "--seed", "-1", "--out", "y"],
])
def test_usage_errors(argv, capsys):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_USAGE and out == "" and "error" in err


def test_semantic_usage_error_writes_nothing(files, capsys):
    out_game = os.path.join(files["dir"], "bad.game")
    code, _, err = run(capsys, "gen-hard", "--m", "5", "--mbar", "3", "--out", out_game)
    assert code == EXIT_USAGE and "strongnash:" in err
    assert not os.path.exists(out_game)


def test_io_errors(files, capsys):
    code, _, err = run(capsys, "solve", os.path.join(files["dir"], "missing.game"))
    assert code == EXIT_IO and err
    broken = os.path.join(files["dir"], "broken.game")
    with open(broken, "w") as fh:
        fh.write('{"players": 2,')
    code, _, err = run(capsys, "solve", broken)
    assert code == EXIT_IO and "broken.game" in err
    code, _, _ = run(capsys, "gen-hard", "--m", "4", "--mbar", "2",
                     "--out", os.path.join(files["dir"], "no", "such", "dir.game"))
    assert code == EXIT_IO
    assert not os.path.exists(os.path.join(files["dir"], "no"))


def test_no_partial_output_on_failure(files, capsys):
    target = os.path.join(files["dir"], "keep.game")
    with open(target, "w") as fh:
        fh.write("original")
    code, _, _ = run(capsys, "perturb", os.path.join(files["dir"], "missing.game"),
                     "--sigma", "0.1", "--out", target)
    assert code == EXIT_IO
    with open(target) as fh:
        assert fh.read() == "original"
    assert sorted(os.listdir(files["dir"])) == sorted(
        ["line.game", "pd.game", "coord.game", "three.game", "block4.game", "sne.json", "pure.json", "keep.game"])
