import json

import pytest

from carefulsynth.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_POSITIVE, run

from corpus import CORPUS


@pytest.fixture
def lasso_file(tmp_path):
    path = tmp_path / "lasso.json"
    path.write_text(
        json.dumps({"stem": ["a", "a", "a", "a", "b", "c"], "loop": ["circbox"]})
    )
    return str(path)


def _run(capsys, *argv):
    code = run([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# solve


def test_solve_finds_solution(fig1_path, capsys):
    code, out, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3")
    assert code == EXIT_POSITIVE
    doc = json.loads(out)
    assert doc["status"] == "solution"
    assert doc["outcome"]["stem"] == ["a", "a", "a", "a", "b", "c"]
    assert doc["outcome"]["loop"] == ["circbox"]
    assert doc["winners"] == [1, 2]
    assert doc["bounds"] == [3, 3]


def test_solve_reports_no_solution(fig1_path, capsys):
    code, out, _ = _run(capsys, "solve", fig1_path, "--bounds", "10,10")
    assert code == EXIT_NEGATIVE
    doc = json.loads(out)
    assert doc["status"] == "no-solution"
    assert doc["diagnostics"]


def test_solve_without_bounds_is_refused(fig1_path, capsys):
    code, out, err = _run(capsys, "solve", fig1_path)
    assert code == EXIT_ERROR
    assert "undecidable" in err


def test_solve_bounds_flag_overrides_document(fig1_text, tmp_path, capsys):
    doc = json.loads(fig1_text)
    doc["bounds"] = [10, 10]
    path = tmp_path / "arena.json"
    path.write_text(json.dumps(doc))
    # document bounds alone: no solution
    code, _, _ = _run(capsys, "solve", str(path))
    assert code == EXIT_NEGATIVE
    # flag overrides, with a warning
    code, out, err = _run(capsys, "solve", str(path), "--bounds", "3,3")
    assert code == EXIT_POSITIVE
    assert "overrides" in err
    assert json.loads(out)["bounds"] == [3, 3]


def test_solve_output_is_byte_identical_across_runs(fig1_path, capsys):
    _, out1, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3")
    _, out2, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3", "--jobs", "3")
    assert out1 == out2


def test_solve_pretty_appends_trace(fig1_path, capsys):
    code, out, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3", "--pretty")
    assert code == EXIT_POSITIVE
    assert "stem: a@0,0" in out
    assert "loop: (circbox@0,0)^omega" in out


def test_solve_unsupported_objective_errors(fig1_text, tmp_path, capsys):
    doc = json.loads(fig1_text)
    doc["objectives"]["players"]["1"] = "F (circ & X box)"
    path = tmp_path / "arena.json"
    path.write_text(json.dumps(doc))
    code, _, err = _run(capsys, "solve", str(path), "--bounds", "3,3")
    assert code == EXIT_ERROR
    assert "unsupported objective" in err


def test_solve_with_automaton_objective(fig1_path, tmp_path, capsys):
    dpa = {
        "states": ["wait", "good"],
        "initial": "wait",
        "priorities": {"wait": 1, "good": 2},
        "transitions": [
            {"src": "wait", "pos": ["circ"], "dst": "good"},
            {"src": "wait", "neg": ["circ"], "dst": "wait"},
            {"src": "good", "dst": "good"},
        ],
    }
    path = tmp_path / "dpa.json"
    path.write_text(json.dumps(dpa))
    code, out, _ = _run(
        capsys, "solve", fig1_path, "--bounds", "3,3", "--dpa", f"1={path}"
    )
    assert code == EXIT_POSITIVE
    assert json.loads(out)["dpa_players"] == [1]


# ---------------------------------------------------------------------------
# check


def test_solve_then_check_round_trip(fig1_path, tmp_path, capsys):
    _, out, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3")
    profile_path = tmp_path / "profile.json"
    profile_path.write_text(out)
    code, out2, _ = _run(
        capsys, "check", fig1_path, str(profile_path), "--bounds", "3,3"
    )
    assert code == EXIT_POSITIVE
    assert json.loads(out2) == {"verdict": "ok", "violations": []}


def test_check_rejects_tampered_profile(fig1_path, tmp_path, capsys):
    _, out, _ = _run(capsys, "solve", fig1_path, "--bounds", "3,3")
    doc = json.loads(out)
    doc["winners"] = [1, 2, 3]
    profile_path = tmp_path / "profile.json"
    profile_path.write_text(json.dumps(doc))
    code, out2, _ = _run(
        capsys, "check", fig1_path, str(profile_path), "--bounds", "3,3"
    )
    assert code == EXIT_NEGATIVE
    verdict = json.loads(out2)
    assert verdict["verdict"] == "invalid"
    assert verdict["violations"]


# ---------------------------------------------------------------------------
# unfold


def test_unfold_emits_arena_document(fig1_path, capsys):
    code, out, _ = _run(capsys, "unfold", fig1_path, "--bounds", "1,1")
    assert code == EXIT_POSITIVE
    doc = json.loads(out)
    assert "BOT" in [s["id"] for s in doc["states"]]
    assert "bot" in doc["atoms"]


def test_unfold_writes_dot_file(fig1_path, tmp_path, capsys):
    dot_path = tmp_path / "u.dot"
    code, _, _ = _run(
        capsys, "unfold", fig1_path, "--bounds", "1,1", "--dot", str(dot_path)
    )
    assert code == EXIT_POSITIVE
    assert dot_path.read_text().startswith("digraph")


# ---------------------------------------------------------------------------
# mc


def test_mc_formula_holds(fig1_path, lasso_file, capsys):
    code, out, _ = _run(capsys, "mc", fig1_path, lasso_file, "F circ")
    assert code == EXIT_POSITIVE
    doc = json.loads(out)
    assert doc["holds"] is True
    assert doc["energy"]["unbounded_careful"] is True


def test_mc_formula_fails(fig1_path, lasso_file, capsys):
    code, out, _ = _run(capsys, "mc", fig1_path, lasso_file, "F diam")
    assert code == EXIT_NEGATIVE
    assert json.loads(out)["holds"] is False


def test_mc_bounded_energy_report(fig1_path, lasso_file, capsys):
    code, out, _ = _run(
        capsys, "mc", fig1_path, lasso_file, "F circ", "--bounds", "3,3"
    )
    assert code == EXIT_POSITIVE
    bounded = json.loads(out)["energy"]["bounded"]
    assert bounded["careful"] is True
    assert bounded["trace"][0] == [0, 0]
    assert bounded["trace"][-1] == [0, 0]


def test_mc_rejects_invalid_lasso(fig1_path, tmp_path, capsys):
    path = tmp_path / "lasso.json"
    path.write_text(json.dumps({"stem": ["a"], "loop": ["boxdiam"]}))
    code, _, err = _run(capsys, "mc", fig1_path, str(path), "F circ")
    assert code == EXIT_ERROR
    assert err


# ---------------------------------------------------------------------------
# gen-reduction and stats


def test_gen_reduction_emits_valid_arena(tmp_path, capsys):
    ca_path = tmp_path / "ca.json"
    ca_path.write_text(json.dumps(CORPUS[1][1]))
    code, out, _ = _run(capsys, "gen-reduction", str(ca_path))
    assert code == EXIT_POSITIVE
    from carefulsynth.arena import parse_arena

    a = parse_arena(out)
    assert a.players == 2
    # pipe the generated arena straight into solve
    arena_path = tmp_path / "arena.json"
    arena_path.write_text(out)
    code, out2, _ = _run(capsys, "solve", str(arena_path), "--bounds", "3,3")
    assert code == EXIT_POSITIVE


def test_stats_reports_sizes(fig1_path, capsys):
    code, out, _ = _run(capsys, "stats", fig1_path, "--bounds", "3,3")
    assert code == EXIT_POSITIVE
    doc = json.loads(out)
    assert doc["states"] == 6 and doc["edges"] == 10
    assert doc["players"] == 3
    assert doc["unfolded_states"] > 6


# ---------------------------------------------------------------------------
# error handling


def test_missing_file_is_an_error(capsys):
    code, _, err = _run(capsys, "solve", "/nonexistent.json", "--bounds", "1,1")
    assert code == EXIT_ERROR
    assert "cannot read" in err


def test_bad_bounds_flag_is_an_error(fig1_path, capsys):
    code, _, _ = _run(capsys, "solve", fig1_path, "--bounds", "x,y")
    assert code == EXIT_ERROR


def test_negative_bounds_flag_is_an_error(fig1_path, capsys):
    code, _, _ = _run(capsys, "solve", fig1_path, "--bounds", "-1,3")
    assert code == EXIT_ERROR
