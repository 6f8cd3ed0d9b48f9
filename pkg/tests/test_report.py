import re
from dataclasses import replace

import pytest

from mcpmix.report import ReportError, Series, line_chart, render_report, trajectory_charts
from mcpmix.trainloop import (DataConfig, TrainConfig, train, write_distribution_csv,
                              write_log_csv)


def polyline_ys(svg, label):
    m = re.search(rf'data-label="{re.escape(label)}" points="([^"]+)"', svg)
    return [float(p.split(",")[1]) for p in m.group(1).split()]


@pytest.fixture(scope="module")
def run(request):
    data = request.getfixturevalue("small_data")
    cfg = TrainConfig(data=DataConfig(gen=data[0]), epochs=3, batch_size=8)
    return train(cfg, data)


def test_constant_series_is_flat():
    svg = line_chart("c", range(5), [Series("s", (0.3,) * 5)])
    assert len(set(polyline_ys(svg, "s"))) == 1


def test_chart_errors():
    with pytest.raises(ReportError):
        line_chart("x", [], [Series("s", ())])
    with pytest.raises(ReportError):
        line_chart("x", [1, 2], [Series("s", (1.0,))])
    with pytest.raises(ReportError):
        line_chart("x", [1, 2], [Series("s", (1.0, float("nan")))])
    with pytest.raises(ReportError):
        trajectory_charts([])


def test_rla_log_charts(run):
    charts = trajectory_charts(run.log)
    assert set(charts) == {"s_t", "rho_t", "discrepancy", "loss", "centroid"}
    assert 'data-label="s_t"' in charts["s_t"] and 'data-label="cosine prior"' in charts["s_t"]
    assert "stroke-dasharray" in charts["s_t"]
    assert len(polyline_ys(charts["s_t"], "s_t")) == len(run.log)


def test_render_is_deterministic(tmp_path, run):
    write_log_csv(run.log, tmp_path / "log.csv")
    write_distribution_csv(run.checkpoints, tmp_path / "dist.csv")
    a = render_report(tmp_path / "log.csv", tmp_path / "a", tmp_path / "dist.csv")
    b = render_report(tmp_path / "log.csv", tmp_path / "b", tmp_path / "dist.csv")
    assert [p.name for p in a] == [p.name for p in b]
    for p, q in zip(a, b):
        assert p.read_bytes() == q.read_bytes()


def test_render_errors(tmp_path):
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ReportError):
        render_report(tmp_path / "empty.csv", tmp_path / "o")
    with pytest.raises(ReportError):
        render_report(tmp_path / "missing.csv", tmp_path / "o")
