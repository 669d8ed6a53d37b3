import csv
import hashlib
from pathlib import Path

import pytest

from mpcr_figures import FigureSpec, SchemaMismatch, render
from mpcr_figures.render import main, read_table

FIXTURES = Path(__file__).parent / "fixtures"

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _spec(figure_id, tmp_path, **kw):
    return FigureSpec(
        figure_id=figure_id,
        input_path=FIXTURES / f"figure{figure_id}.csv",
        output_path=tmp_path / f"fig{figure_id}.png",
        **kw,
    )


@pytest.mark.parametrize("figure_id", ["A", "1", "2", "3"])
def test_renders_fixture(figure_id, tmp_path):
    spec = _spec(figure_id, tmp_path)
    before = hashlib.sha256(spec.input_path.read_bytes()).hexdigest()
    fig = render(spec)
    assert spec.output_path.exists()
    assert spec.output_path.read_bytes()[:8] == PNG_MAGIC
    assert spec.output_path.stat().st_size > 1000
    # inputs are never mutated
    assert hashlib.sha256(spec.input_path.read_bytes()).hexdigest() == before
    import matplotlib.pyplot as plt

    plt.close(fig)


@pytest.mark.parametrize("figure_id", ["1", "3"])
def test_paired_figures_draw_identity_line(figure_id, tmp_path):
    import matplotlib.pyplot as plt

    fig = render(_spec(figure_id, tmp_path))
    found = False
    for ax in fig.axes:
        for line in ax.lines:
            xs, ys = line.get_xdata(), line.get_ydata()
            if len(xs) == 2 and list(xs) == list(ys):
                found = True
    assert found
    plt.close(fig)


def test_identity_line_can_be_suppressed(tmp_path):
    import matplotlib.pyplot as plt

    fig = render(_spec("1", tmp_path, identity_line=False))
    assert all(len(ax.lines) == 0 for ax in fig.axes)
    plt.close(fig)


def test_plotted_points_equal_csv_values(tmp_path):
    # the renderer only replots file contents: scatter offsets == CSV columns
    import matplotlib.pyplot as plt

    with open(FIXTURES / "figure1.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig = render(_spec("1", tmp_path))
    offsets = fig.axes[0].collections[0].get_offsets()
    assert [p[0] for p in offsets] == [float(r["limit_1"]) for r in rows]
    assert [p[1] for p in offsets] == [float(r["scaled_Z_1"]) for r in rows]
    plt.close(fig)


def test_figure_A_curves_start_at_one(tmp_path):
    columns = read_table(FIXTURES / "figureA.csv", "A")
    assert columns["x"][0] == 0.0
    for name in columns:
        if name.startswith("G_"):
            assert columns[name][0] == 1.0


def test_missing_file(tmp_path):
    spec = FigureSpec(
        figure_id="1",
        input_path=tmp_path / "nope.csv",
        output_path=tmp_path / "out.png",
    )
    with pytest.raises(FileNotFoundError):
        render(spec)


def test_schema_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("alpha,beta\n1,2\n")
    with pytest.raises(SchemaMismatch):
        render(FigureSpec("1", bad, tmp_path / "o.png"))
    with pytest.raises(SchemaMismatch):
        render(FigureSpec("A", bad, tmp_path / "o.png"))


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "fig2.png"
    rc = main(["--id", "2", "--in", str(FIXTURES / "figure2.csv"), "--out", str(out)])
    assert rc == 0
    assert out.read_bytes()[:8] == PNG_MAGIC


def test_cli_schema_error_exit(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("alpha\n1\n")
    rc = main(["--id", "3", "--in", str(bad), "--out", str(tmp_path / "x.png")])
    assert rc == 2


def test_cli_missing_file_exit(tmp_path):
    rc = main(["--id", "3", "--in", str(tmp_path / "gone.csv"),
               "--out", str(tmp_path / "x.png")])
    assert rc == 2
