"""Tests for the command line entry point."""

import json
from fractions import Fraction

import pytest

from src.cli import _grid, build_parser, main
from src.records.models import MaxLinInstance, ProblemKind

WORKED = MaxLinInstance(matrix=((1, 0), (0, 1), (1, 1)), rhs=(1, 1, 0))


@pytest.fixture
def worked_file(store, tmp_path):
    return store.write_instance(tmp_path / "worked.json", ProblemKind.MAXLIN, WORKED)


class TestParser:
    def test_unknown_suite_is_rejected(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["verify", "everything"])
        assert info.value.code == 2

    def test_verify_defaults(self):
        args = build_parser().parse_args(["verify", "pipeline"])
        assert (args.n_max, args.m_max, args.seed) == (4, 6, 0)

    def test_reduce_reads_exact_rationals(self):
        args = build_parser().parse_args(["reduce", "cvp-to-bdd", "a.json", "b.json", "--alpha", "3/2"])
        assert args.alpha == Fraction(3, 2)

    def test_grid(self):
        assert _grid("0", "1", 3) == [0, Fraction(1, 2), 1]
        assert _grid("2", "3", 1) == [2]
        assert _grid("2", "3", 0) == []


class TestReduceAndSolve:
    def test_maxlin_to_cvp(self, store, worked_file, tmp_path, capsys):
        out = tmp_path / "cvp.json"
        assert main(["reduce", "maxlin-to-cvp", str(worked_file), str(out)]) == 0
        assert "r^p = 9/8" in capsys.readouterr().out
        cvp = store.load_payload(out, ProblemKind.CVP)
        assert cvp.radius_pth_power == Fraction(9, 8)
        assert store.read_instance(out).manifest.command[:2] == ["reduce", "maxlin-to-cvp"]

    def test_solve_maxlin(self, worked_file, capsys):
        assert main(["solve", "maxlin", str(worked_file)]) == 0
        assert capsys.readouterr().out.strip() == "YES, OPT = 3/3, assignment (1, 1)"

    def test_solve_cvp_json(self, worked_file, tmp_path, capsys):
        out = tmp_path / "cvp.json"
        main(["reduce", "maxlin-to-cvp", str(worked_file), str(out), "--p", "3"])
        capsys.readouterr()
        assert main(["solve", "cvp", str(out), "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["class"] == "yes"
        assert report["distance_pth_power"] == "0/1"
        assert report["witness"] == ["1/1", "1/1", "0/1"]

    def test_solve_lattice_file(self, tmp_path, store, capsys):
        path = tmp_path / "z2.json"
        path.write_text(
            json.dumps({"format_version": "1", "kind": "lattice", "payload": {"generators": [[2, 0], [0, 1]]}}),
            encoding="utf-8",
        )
        assert main(["solve", "svp", str(path)]) == 0
        assert capsys.readouterr().out.startswith("lambda1^p = 1/1")


class TestExitCodes:
    def test_missing_file(self, store, tmp_path, capsys):
        assert main(["solve", "maxlin", str(tmp_path / "absent.json")]) == 2
        assert capsys.readouterr().err.strip()

    def test_bdd_needs_alpha(self, store, worked_file, tmp_path, capsys):
        assert main(["reduce", "cvp-to-bdd", str(worked_file), str(tmp_path / "q.json")]) == 2
        assert "--alpha" in capsys.readouterr().err

    def test_invalid_epsilon_is_a_schema_error(self, worked_file, tmp_path, capsys):
        code = main(["reduce", "maxlin-to-cvp", str(worked_file), str(tmp_path / "c.json"), "--epsilon", "5/8"])
        assert code == 2
        assert "schema-error" in capsys.readouterr().err

    def test_budget(self, store, tmp_path, capsys):
        wide = MaxLinInstance(matrix=((1,) * 25,), rhs=(1,))
        path = store.write_instance(tmp_path / "wide.json", ProblemKind.MAXLIN, wide)
        assert main(["solve", "maxlin", str(path)]) == 4
        assert "budget-exceeded" in capsys.readouterr().err

    @pytest.mark.slow
    def test_alpha_below_threshold(self, store, tmp_path, capsys):
        source = tmp_path / "m.json"
        store.write_instance(source, ProblemKind.MAXLIN, MaxLinInstance(matrix=((1,),), rhs=(1,)))
        cvp = tmp_path / "c.json"
        main(["reduce", "maxlin-to-cvp", str(source), str(cvp)])
        assert main(["reduce", "cvp-to-bdd", str(cvp), str(tmp_path / "q.json"), "--alpha", "1/2"]) == 3
        assert "alpha-below-threshold" in capsys.readouterr().err


class TestExplore:
    def test_empty_grid_prints_the_header(self, store, capsys):
        assert main(["explore", "conjecture", "--p-steps", "0"]) == 0
        assert capsys.readouterr().out.strip() == "p,tau,sign,margin,status"

    def test_csv_output(self, store, tmp_path, capsys):
        path = tmp_path / "grid.csv"
        args = ["explore", "conjecture", "--p-min", "3", "--p-max", "3", "--p-steps", "1",
                "--tau-min", "1", "--tau-max", "2", "--tau-steps", "2", "--csv", str(path)]
        assert main(args) == 0
        frame = store.read_table(path)
        assert len(frame) == 2
        assert set(frame["sign"]) == {"+"}
