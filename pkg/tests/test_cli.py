import csv
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from rifboot import load_dataset, load_ensemble
from rifboot.cli import _fmt, _parse_methods, main

SYNTH_ARGS = [
    "synth",
    "--n-journals", "4",
    "--articles-min", "8",
    "--articles-max", "12",
    "--quality", "120,60,30,15",
    "--seed", "3",
]


def run(argv):
    return main([str(a) for a in argv])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def compute_args(data, out, **extra):
    args = [
        "compute",
        "--journals", data / "journals.csv",
        "--articles", data / "articles.csv",
        "--citations", data / "citations.csv",
        "--out", out,
        "--bootstrap", "80",
        "--seed", "5",
    ]
    for flag, value in extra.items():
        args.append(f"--{flag.replace('_', '-')}")
        if value is not True:
            args.append(value)
    return args


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("data")
    assert run(SYNTH_ARGS + ["--out", path]) == 0
    return path


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, data_dir):
    path = tmp_path_factory.mktemp("run")
    assert run(compute_args(data_dir, path)) == 0
    return path


class TestSynthCommand:
    def test_writes_loadable_dataset(self, data_dir):
        ds = load_dataset(
            data_dir / "journals.csv",
            data_dir / "articles.csv",
            data_dir / "citations.csv",
        )
        assert ds.n_journals == 4
        assert all(8 <= c <= 12 for c in ds.article_counts)

    def test_prints_planted_ranks(self, tmp_path, capsys):
        assert run(SYNTH_ARGS + ["--out", tmp_path]) == 0
        out = capsys.readouterr().out
        assert "planted ranks: 0001-0001:1, 0002-0002:2, 0003-0003:3, 0004-0004:4" in out

    def test_bad_quality_vector_is_usage_error(self, tmp_path, capsys):
        assert run(["synth", "--n-journals", "3", "--quality", "1,oops,3", "--out", tmp_path]) == 1
        assert "comma-separated" in capsys.readouterr().err


class TestComputeCommand:
    def test_writes_all_outputs(self, run_dir):
        assert (run_dir / "results.csv").exists()
        assert (run_dir / "ensemble.csv").exists()
        assert (run_dir / "eigenfactor.csv").exists()

    def test_results_columns_and_order(self, run_dir):
        rows = read_rows(run_dir / "results.csv")
        assert len(rows) == 4
        expected = [
            "rank", "issn", "name", "rif", "rif_top100", "se", "ci_lo", "ci_hi", "simple_if",
            "goldstein_lo", "goldstein_hi", "xie_lo", "xie_hi",
            "xie_sigmadiff_lo", "xie_sigmadiff_hi",
            "mogstad_lo", "mogstad_hi", "mogstad_cov_lo", "mogstad_cov_hi",
        ]
        assert list(rows[0].keys()) == expected
        ranks = [float(r["rank"]) for r in rows]
        assert ranks == sorted(ranks)
        rifs = [float(r["rif"]) for r in rows]
        assert rifs == sorted(rifs, reverse=True)
        # rank intervals contain the empirical rank
        for row in rows:
            for name in ("goldstein", "xie", "mogstad"):
                assert int(row[f"{name}_lo"]) <= float(row["rank"]) <= int(row[f"{name}_hi"])

    def test_ensemble_is_loadable_and_consistent(self, run_dir):
        ens, issns = load_ensemble(run_dir / "ensemble.csv")
        assert ens.config.replications == 80
        assert ens.config.master_seed == 5
        assert ens.samples.shape == (80, 4)
        assert len(issns) == 4

    def test_eigenfactor_sums_to_one(self, run_dir):
        rows = read_rows(run_dir / "eigenfactor.csv")
        assert list(rows[0].keys()) == ["issn", "name", "eigenfactor", "article_influence"]
        total = sum(float(r["eigenfactor"]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_reruns_are_byte_identical(self, data_dir, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        assert run(compute_args(data_dir, first)) == 0
        assert run(compute_args(data_dir, second)) == 0
        for name in ("results.csv", "ensemble.csv", "eigenfactor.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_worker_count_does_not_change_output(self, data_dir, run_dir, tmp_path):
        threaded = tmp_path / "w4"
        assert run(compute_args(data_dir, threaded, workers="4")) == 0
        for name in ("results.csv", "ensemble.csv"):
            assert (threaded / name).read_bytes() == (run_dir / name).read_bytes()

    def test_method_subset_controls_columns(self, data_dir, tmp_path):
        out = tmp_path / "subset"
        assert run(compute_args(data_dir, out, methods="mogstad,goldstein")) == 0
        rows = read_rows(out / "results.csv")
        # canonical order regardless of how the user listed them
        assert list(rows[0].keys())[-4:] == ["goldstein_lo", "goldstein_hi", "mogstad_lo", "mogstad_hi"]
        assert "xie_lo" not in rows[0]

    def test_top100_norm_scales_score_columns(self, data_dir, tmp_path):
        out = tmp_path / "top"
        assert run(compute_args(data_dir, out, norm="top100")) == 0
        rows = read_rows(out / "results.csv")
        for row in rows:
            assert float(row["rif"]) == pytest.approx(float(row["rif_top100"]), rel=1e-12)
        assert max(float(r["rif"]) for r in rows) == pytest.approx(100.0, rel=1e-12)

    def test_norm_preserves_relative_uncertainty(self, data_dir, run_dir, tmp_path):
        out = tmp_path / "sum1"
        assert run(compute_args(data_dir, out, norm="sum1")) == 0
        unit = read_rows(run_dir / "results.csv")
        sum1 = read_rows(out / "results.csv")
        for a, b in zip(unit, sum1):
            assert float(a["se"]) / float(a["rif"]) == pytest.approx(
                float(b["se"]) / float(b["rif"]), rel=1e-9
            )

    def test_paper_faithful_changes_scores_slightly(self, data_dir, run_dir, tmp_path):
        out = tmp_path / "pf"
        assert run(compute_args(data_dir, out, paper_faithful=True)) == 0
        default = np.array([float(r["rif"]) for r in read_rows(run_dir / "results.csv")])
        fixed = np.array([float(r["rif"]) for r in read_rows(out / "results.csv")])
        assert np.allclose(default, fixed, atol=1e-3)

    def test_summary_lines(self, data_dir, tmp_path, capsys):
        out = tmp_path / "s"
        assert run(compute_args(data_dir, out)) == 0
        stdout = capsys.readouterr().out
        assert "journals: 4 (0 filtered)" in stdout
        assert "replications: 80" in stdout
        assert "width[goldstein]=" in stdout
        assert f"wrote {out / 'results.csv'}" in stdout

    def test_low_citer_filter_reports_to_stderr(self, tmp_path, capsys):
        data = tmp_path / "weak"
        # journal 4 cites almost nothing and gets filtered at the default 12
        assert run([
            "synth", "--n-journals", "4", "--articles-min", "6", "--articles-max", "8",
            "--quality", "120,60,30,15", "--citing-activity", "1,1,1,0.01",
            "--seed", "11", "--out", data,
        ]) == 0
        capsys.readouterr()
        out = tmp_path / "filtered"
        assert run(compute_args(data, out)) == 0
        captured = capsys.readouterr()
        assert "filtered 0004-0004" in captured.err
        assert "journals: 3 (1 filtered)" in captured.out
        assert len(read_rows(out / "results.csv")) == 3


class TestRanksCommand:
    def test_matches_compute_output(self, run_dir, tmp_path):
        out = tmp_path / "ranks"
        assert run(["ranks", run_dir / "ensemble.csv", "--out", out]) == 0
        rank_rows = {r["issn"]: r for r in read_rows(out / "ranks.csv")}
        for row in read_rows(run_dir / "results.csv"):
            again = rank_rows[row["issn"]]
            assert float(again["empirical_rank"]) == float(row["rank"])
            for name in ("goldstein", "xie", "xie_sigmadiff", "mogstad", "mogstad_cov"):
                assert again[f"{name}_lo"] == row[f"{name}_lo"]
                assert again[f"{name}_hi"] == row[f"{name}_hi"]

    def test_alpha_widens_intervals(self, run_dir, tmp_path):
        tight = tmp_path / "a20"
        loose = tmp_path / "a01"
        assert run(["ranks", run_dir / "ensemble.csv", "--out", tight, "--alpha", "0.49"]) == 0
        assert run(["ranks", run_dir / "ensemble.csv", "--out", loose, "--alpha", "0.01"]) == 0
        for t, l in zip(read_rows(tight / "ranks.csv"), read_rows(loose / "ranks.csv")):
            for name in ("goldstein", "mogstad"):
                assert int(l[f"{name}_lo"]) <= int(t[f"{name}_lo"])
                assert int(l[f"{name}_hi"]) >= int(t[f"{name}_hi"])

    def test_rejects_non_ensemble_file(self, run_dir, tmp_path, capsys):
        code = run(["ranks", run_dir / "results.csv", "--out", tmp_path / "x"])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestPlotCommand:
    def test_renders_valid_svg(self, run_dir, tmp_path):
        out = tmp_path / "figs"
        assert run(["plot", run_dir / "results.csv", "--out", out]) == 0
        for name in ("scores_arithmetic.svg", "scores_log.svg", "rank_intervals.svg"):
            root = ET.parse(out / name).getroot()
            assert root.tag.endswith("svg")
            assert len(list(root.iter())) > 20

    def test_rendering_is_structurally_stable(self, run_dir, tmp_path):
        a = tmp_path / "fa"
        b = tmp_path / "fb"
        assert run(["plot", run_dir / "results.csv", "--out", a]) == 0
        assert run(["plot", run_dir / "results.csv", "--out", b]) == 0
        for name in ("scores_arithmetic.svg", "rank_intervals.svg"):
            count_a = len(list(ET.parse(a / name).getroot().iter()))
            count_b = len(list(ET.parse(b / name).getroot().iter()))
            assert count_a == count_b

    def test_rejects_csv_without_rank_columns(self, run_dir, tmp_path, capsys):
        code = run(["plot", run_dir / "eigenfactor.csv", "--out", tmp_path / "x"])
        assert code == 2
        assert "missing columns" in capsys.readouterr().err


class TestExitCodes:
    def test_usage_alpha_out_of_range(self, data_dir, tmp_path, capsys):
        code = run(compute_args(data_dir, tmp_path / "x", alpha="0.7"))
        assert code == 1
        assert "--alpha" in capsys.readouterr().err

    def test_usage_unknown_method(self, data_dir, tmp_path, capsys):
        code = run(compute_args(data_dir, tmp_path / "x", methods="goldstein,nope"))
        assert code == 1
        assert "unknown method" in capsys.readouterr().err

    def test_usage_duplicate_input_paths(self, data_dir, tmp_path, capsys):
        code = run([
            "compute",
            "--journals", data_dir / "journals.csv",
            "--articles", data_dir / "journals.csv",
            "--citations", data_dir / "citations.csv",
            "--out", tmp_path / "x",
        ])
        assert code == 1
        assert "distinct" in capsys.readouterr().err

    def test_usage_errors_from_argparse_itself(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["compute"])  # missing required flags
        assert exc.value.code == 1
        with pytest.raises(SystemExit) as exc:
            run(["not-a-command"])
        assert exc.value.code == 1

    def test_data_missing_file(self, data_dir, tmp_path, capsys):
        code = run([
            "compute",
            "--journals", data_dir / "journals.csv",
            "--articles", data_dir / "articles.csv",
            "--citations", tmp_path / "absent.csv",
            "--out", tmp_path / "x",
        ])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_data_malformed_csv(self, data_dir, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("issn,name\n0001-0001,A\n")
        code = run([
            "compute",
            "--journals", bad,
            "--articles", data_dir / "articles.csv",
            "--citations", data_dir / "citations.csv",
            "--out", tmp_path / "x",
        ])
        assert code == 2
        assert "expected header" in capsys.readouterr().err

    def test_numerical_oscillating_system(self, tmp_path, capsys):
        # two journals that only cite each other form a two-cycle; the
        # residual rule can never converge on it
        data = tmp_path / "cycle"
        data.mkdir()
        (data / "journals.csv").write_text(
            "issn,name,article_count\n1111-1111,One,1\n2222-2222,Two,1\n"
        )
        (data / "articles.csv").write_text("article_id,issn\na,1111-1111\nb,2222-2222\n")
        (data / "citations.csv").write_text(
            "article_id,citing_issn,count\na,2222-2222,4\nb,1111-1111,6\n"
        )
        code = run(compute_args(data, tmp_path / "x", min_out_citations="0"))
        assert code == 3
        assert "error:" in capsys.readouterr().err


class TestFormatting:
    def test_fmt_integers_are_bare(self):
        assert _fmt(3.0) == "3"
        assert _fmt(-2.0) == "-2"
        assert _fmt(2.5) == "2.5"
        assert _fmt(1 / 3) == "0.333333333333"

    def test_parse_methods_dedupes_and_orders(self):
        assert _parse_methods("mogstad,goldstein,mogstad") == ("goldstein", "mogstad")
        assert _parse_methods("xie") == ("xie",)

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["--version"])
        assert exc.value.code == 0
        assert "rifboot" in capsys.readouterr().out
