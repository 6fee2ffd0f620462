"""Figure rendering: data-model assertions, styles, panels, determinism."""

import math
import re

import pytest

from colme_figures import FigureSpec, MissingSeriesError, load_rows, render

HEADER = "curve,rule,epsilon,r,M,t,mse_mean,mse_stderr,replicas,seed"


def write_csv(path, rows):
    lines = [HEADER]
    for curve, rule, eps, r, t, mse in rows:
        lines.append(f"{curve},{rule},{eps},{r},12,{t},{mse:.17g},0,5,1")
    path.write_text("\n".join(lines) + "\n")
    return path


def quarter_inverse_rows(curve="sim", rule="oracle", eps="2", r=4, t_max=1000):
    return [(curve, rule, eps, r, t, 0.25 / t) for t in range(1, t_max + 1)]


class TestLoadRows:
    def test_parses_schema(self, tmp_path):
        path = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=3))
        rows = load_rows([path])
        assert len(rows) == 3
        assert rows[0]["epsilon"] == 2.0
        assert rows[2]["mse_mean"] == 0.25 / 3

    def test_inf_token(self, tmp_path):
        path = write_csv(tmp_path / "a.csv", [("sim", "oracle", "inf", 4, 1, 0.1)])
        assert math.isinf(load_rows([path])[0]["epsilon"])

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            load_rows([path])


class TestRender:
    def test_single_curve_smoke(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=50))
        out = tmp_path / "fig.svg"
        fig = render(FigureSpec((str(csv),), str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert len(fig.axes) == 1
        assert len(fig.axes[0].get_lines()) == 1

    def test_two_degrees_two_panels(self, tmp_path):
        rows = quarter_inverse_rows(r=5, t_max=20) + quarter_inverse_rows(r=20, t_max=20)
        csv = write_csv(tmp_path / "a.csv", rows)
        fig = render(FigureSpec((str(csv),), str(tmp_path / "fig.svg")))
        assert len(fig.axes) == 2
        assert [ax.get_title() for ax in fig.axes] == ["r = 5", "r = 20"]

    def test_slope_minus_one_from_data_model(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=1000))
        fig = render(FigureSpec((str(csv),), str(tmp_path / "fig.svg")))
        line = fig.axes[0].get_lines()[0]
        xs, ys = line.get_xdata(), line.get_ydata()
        pts = {int(x): float(y) for x, y in zip(xs, ys)}
        slope = (math.log(pts[1000]) - math.log(pts[10])) / \
            (math.log(1000.0) - math.log(10.0))
        assert abs(slope + 1.0) <= 1e-6

    def test_t_window_filters(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=500))
        fig = render(FigureSpec((str(csv),), str(tmp_path / "fig.svg"),
                                t_min=10, t_max=100))
        xs = fig.axes[0].get_lines()[0].get_xdata()
        assert min(xs) == 10 and max(xs) == 100

    def test_multiple_csv_inputs_merge(self, tmp_path):
        a = write_csv(tmp_path / "a.csv", quarter_inverse_rows(rule="oracle", t_max=20))
        b = write_csv(tmp_path / "b.csv",
                      [("theory-local", "-", "2", 4, t, 0.25 / t) for t in range(1, 21)])
        fig = render(FigureSpec((str(a), str(b)), str(tmp_path / "fig.svg")))
        assert len(fig.axes[0].get_lines()) == 2

    def test_missing_series_named(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=5))
        with pytest.raises(MissingSeriesError) as err:
            render(FigureSpec((str(csv),), str(tmp_path / "fig.svg"),
                              require=(("sim", 2.0, 4), ("theory-local", 2.0, 4))))
        assert ("theory-local", 2.0, 4) in err.value.missing
        assert ("sim", 2.0, 4) not in err.value.missing

    def test_nonpositive_mse_rejected(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv",
                        [("sim", "oracle", "2", 4, 1, 0.1),
                         ("sim", "oracle", "2", 4, 2, 0.0)])
        with pytest.raises(ValueError, match="non-positive"):
            render(FigureSpec((str(csv),), str(tmp_path / "fig.svg")))

    def test_no_statistics_recomputed(self, tmp_path):
        # plotted y-values are exactly the CSV column
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=30))
        fig = render(FigureSpec((str(csv),), str(tmp_path / "fig.svg")))
        ys = list(fig.axes[0].get_lines()[0].get_ydata())
        assert ys == [0.25 / t for t in range(1, 31)]


class TestDeterminism:
    def test_identical_svg_bytes(self, tmp_path):
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=40))
        outs = []
        for name in ("one.svg", "two.svg"):
            out = tmp_path / name
            render(FigureSpec((str(csv),), str(out)))
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        assert b"dc:date" not in outs[0].lower()


class TestCli:
    def test_render_fig_command(self, tmp_path, capsys):
        from colme_figures.cli import main
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=20))
        out = tmp_path / "fig.svg"
        assert main(["--csv", str(csv), "--out", str(out),
                     "--t-min", "1", "--t-max", "20"]) == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_bad_csv_exit_code(self, tmp_path):
        from colme_figures.cli import main
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        assert main(["--csv", str(bad), "--out", str(tmp_path / "f.svg")]) == 1

    def test_png_output(self, tmp_path):
        from colme_figures.cli import main
        csv = write_csv(tmp_path / "a.csv", quarter_inverse_rows(t_max=20))
        out = tmp_path / "fig.png"
        assert main(["--csv", str(csv), "--out", str(out)]) == 0
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
