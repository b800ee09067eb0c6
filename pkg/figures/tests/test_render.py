import json
from pathlib import Path

import pytest

from render_figures import (FigureSpec, RenderError, build_figure, main,
                            render, specs_from_manifest)


def test_specs_cover_expected_kinds(campaigns, tmp_path):
    beta_specs = specs_from_manifest(campaigns["beta"], tmp_path)
    kinds = {s.kind for s in beta_specs}
    assert "rate_vs_beta" in kinds
    assert "trajectory_map" in kinds
    t_specs = specs_from_manifest(campaigns["T"], tmp_path)
    assert "rate_vs_T" in {s.kind for s in t_specs}


def test_all_three_kinds_render(campaigns, tmp_path):
    rendered = set()
    for key in ("beta", "T"):
        out = tmp_path / key
        assert main([str(campaigns[key]), str(out)]) == 0
        rendered |= {p.name for p in out.glob("*.png")}
    assert "rate_vs_beta.png" in rendered
    assert "rate_vs_T.png" in rendered
    assert any(name.startswith("trajectory_map") for name in rendered)


def test_rerender_byte_identical(campaigns, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main([str(campaigns["beta"]), str(out1)]) == 0
    assert main([str(campaigns["beta"]), str(out2)]) == 0
    files1 = sorted(p.name for p in out1.glob("*.png"))
    assert files1
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_trajectory_map_element_counts(campaigns, tmp_path):
    manifest = json.loads(Path(campaigns["beta"]).read_text())
    spec = next(s for s in specs_from_manifest(campaigns["beta"], tmp_path)
                if s.kind == "trajectory_map")
    fig = build_figure(spec)
    ax = fig.axes[0]
    n_schemes = len(spec.trajectory_csvs)
    n_users = len(manifest["config"]["user_pos"])
    # one curve per scheme, one marker artist per user, one for the RIS
    assert len(ax.lines) == n_schemes + n_users + 1
    labels = {line.get_label() for line in ax.lines}
    assert set(spec.trajectory_csvs) <= labels
    assert "RIS" in labels


def test_rate_plot_has_error_bars_and_all_values(campaigns, tmp_path):
    spec = next(s for s in specs_from_manifest(campaigns["beta"], tmp_path)
                if s.kind == "rate_vs_beta")
    fig = build_figure(spec)
    ax = fig.axes[0]
    assert len(ax.containers) == 2  # one errorbar container per scheme
    for container in ax.containers:
        xs = container.lines[0].get_xdata()
        assert sorted(xs) == [3.0, 6.0]


def test_missing_manifest_errors(tmp_path, capsys):
    assert main([str(tmp_path / "nope.json"), str(tmp_path)]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_empty_rates_csv_names_file(campaigns, tmp_path):
    src = Path(campaigns["beta"]).parent
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "manifest.json").write_text(Path(campaigns["beta"]).read_text())
    (broken / "rates.csv").write_text("")
    rc = main([str(broken / "manifest.json"), str(tmp_path / "out")])
    assert rc == 1


def test_garbled_trajectory_names_file(campaigns, tmp_path, capsys):
    spec = next(s for s in specs_from_manifest(campaigns["beta"], tmp_path)
                if s.kind == "trajectory_map")
    scheme = sorted(spec.trajectory_csvs)[0]
    bad = tmp_path / "bad_traj.csv"
    bad.write_text("n,x_m,y_m\n0,abc,def\n")
    spec.trajectory_csvs[scheme] = bad
    with pytest.raises(RenderError, match="bad_traj.csv"):
        render(spec)


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(RenderError, match="unknown figure kind"):
        FigureSpec(kind="pie_chart", out_path=tmp_path / "x.png")


def test_usage_error_exit_2(capsys):
    assert main(["only-one-arg"]) == 2
