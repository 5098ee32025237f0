import json
import shutil

import matplotlib
import pytest

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ecosim_figures.io import SchemaError, read_sweep_summary
from ecosim_figures.plot_run import main as plot_run_main
from ecosim_figures.plot_run import plot_run
from ecosim_figures.plot_sweep import plot_sweep


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


class TestPlotRun:
    def test_all_three_experiments_render(self, workspace, tmp_path):
        for exp in ("exp1", "exp2", "exp3"):
            out = tmp_path / f"{exp}.png"
            fig = plot_run(workspace / "runs" / exp, out)
            assert out.is_file() and out.stat().st_size > 0
            assert len(fig.axes) == 4

    def test_classes_in_legend(self, workspace, tmp_path):
        fig = plot_run(workspace / "runs" / "exp1", tmp_path / "x.png")
        labels = {t.get_text() for t in fig.axes[1].get_legend().get_texts()}
        assert labels == {"niche", "mainstream"}

    def test_threshold_run_has_dashed_threshold_line(self, workspace, tmp_path):
        fig = plot_run(workspace / "runs" / "exp2", tmp_path / "exp2.png")
        box_ax = fig.axes[0]
        dashed = [
            ln
            for ln in box_ax.get_lines()
            if ln.get_linestyle() == "--" and ln.get_ydata()[0] == pytest.approx(0.04)
        ]
        assert dashed, "expected a dashed line at the switching threshold"

    def test_monolithic_run_has_no_threshold_line(self, workspace, tmp_path):
        fig = plot_run(workspace / "runs" / "exp1", tmp_path / "exp1.png")
        dashed = [ln for ln in fig.axes[0].get_lines() if ln.get_linestyle() == "--"]
        assert not dashed

    def test_missing_column_is_schema_error(self, workspace, tmp_path):
        broken = tmp_path / "broken"
        shutil.copytree(workspace / "runs" / "exp1", broken)
        csv_path = broken / "consumer_daily.csv"
        lines = csv_path.read_text().splitlines()
        csv_path.write_text("\n".join(l.rsplit(",", 1)[0] for l in lines) + "\n")
        with pytest.raises(SchemaError, match="list_utility"):
            plot_run(broken, tmp_path / "broken.png")

    def test_empty_rows_error_no_image(self, workspace, tmp_path):
        broken = tmp_path / "empty"
        shutil.copytree(workspace / "runs" / "exp1", broken)
        header = (broken / "consumer_daily.csv").read_text().splitlines()[0]
        (broken / "consumer_daily.csv").write_text(header + "\n")
        out = tmp_path / "empty.png"
        with pytest.raises(SchemaError, match="no data rows"):
            plot_run(broken, out)
        assert not out.exists()

    def test_cli_exit_codes(self, workspace, tmp_path):
        assert plot_run_main([str(workspace / "runs" / "exp1"), str(tmp_path / "a.png")]) == 0
        assert plot_run_main([str(tmp_path / "missing"), str(tmp_path / "b.png")]) == 1
        assert plot_run_main(["just-one-arg"]) == 2


class TestPlotSweep:
    def test_bar_heights_match_summary_exactly(self, workspace, tmp_path):
        summary_path = workspace / "sweep" / "sweep_summary.json"
        fig = plot_sweep(summary_path, tmp_path / "sweep.png")
        doc = read_sweep_summary(summary_path)
        experiments = sorted(doc["experiments"])
        heights = [patch.get_height() for ax in fig.axes for patch in ax.patches]
        assert len(heights) == 3 * 4
        expected = []
        for group in ("consumer", "provider"):
            for cls in ("niche", "mainstream"):
                for e in experiments:
                    expected.append(doc["experiments"][e]["cross_seed"][group][cls]["mean"])
        assert sorted(heights) == sorted(expected)
        for ax in fig.axes:
            by_x = sorted((p.get_x(), p.get_height()) for p in ax.patches)
            assert len(by_x) == 6

    def test_single_seed_warns_but_renders(self, workspace, tmp_path):
        summary_path = workspace / "sweep" / "sweep_summary.json"
        doc = json.loads(summary_path.read_text())
        for exp in doc["experiments"].values():
            exp["single_seed"] = True
            for group in exp["cross_seed"].values():
                for stats in group.values():
                    stats["std"] = 0.0
        single_path = tmp_path / "single.json"
        single_path.write_text(json.dumps(doc))
        out = tmp_path / "single.png"
        with pytest.warns(UserWarning, match="single-seed"):
            plot_sweep(single_path, out)
        assert out.is_file()

    def test_empty_summary_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"experiments": {}}))
        with pytest.raises(SchemaError, match="no experiments"):
            plot_sweep(bad, tmp_path / "bad.png")
