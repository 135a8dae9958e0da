import hashlib
from pathlib import Path

import pytest

from gapplots import FigureSpec, SchemaError, load_table, render
from gapplots.cli import main

from conftest import write_rows

PNG_MAGIC = b"\x89PNG"


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestSchemaValidation:
    def test_missing_schema_tag_rejected(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("N,delta\n4,0.5\n")
        with pytest.raises(SchemaError, match="schema tag"):
            load_table(path)

    def test_missing_column_is_named(self, tmp_path, bound_csv):
        table = load_table(bound_csv)
        with pytest.raises(SchemaError, match="'nope'"):
            table.column("nope")

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("# schema=rampmcmc-csv-v1\nN,delta\n4,0.5,9\n")
        with pytest.raises(SchemaError, match="ragged.csv:3"):
            load_table(path)

    def test_cli_exit_2_names_column(self, tmp_path, kappa_csv, capsys):
        # a kappa file lacks 'bound', so the bound figure must refuse it
        code = main([
            "render", "--kind", "bound-vs-alpha",
            "--data", str(kappa_csv), "--output", str(tmp_path / "x.png"),
        ])
        assert code == 2
        assert "'bound'" in capsys.readouterr().err


class TestRendering:
    def test_bound_vs_alpha_with_overlay(self, tmp_path, bound_csv, gap_csv):
        out = tmp_path / "fig2.png"
        render(FigureSpec(kind="bound-vs-alpha", data=bound_csv, overlay=gap_csv, output=out))
        assert out.read_bytes()[:4] == PNG_MAGIC
        assert out.stat().st_size > 5000

    def test_gap_vs_alpha_with_inset(self, tmp_path, summary_csv, fit_json):
        out = tmp_path / "fig3.png"
        render(FigureSpec(kind="gap-vs-alpha", data=summary_csv, fits=(fit_json,), output=out))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_gap_vs_kappa(self, tmp_path, kappa_csv):
        out = tmp_path / "fig3b.png"
        render(FigureSpec(kind="gap-vs-kappa", data=kappa_csv, output=out))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_scaling_inset_standalone(self, tmp_path, summary_csv, fit_json):
        out = tmp_path / "inset.png"
        render(FigureSpec(kind="scaling-inset", data=summary_csv, fits=(fit_json,), output=out))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_scaling_inset_from_minimal_points(self, tmp_path, fit_json):
        points = write_rows(
            tmp_path / "points.csv", "N,delta,sigma",
            [f"{n},{2.0 ** (-0.2 * n)},{0.01 * 2.0 ** (-0.2 * n)}" for n in (5, 6, 7, 8)],
        )
        out = tmp_path / "inset.png"
        render(FigureSpec(kind="scaling-inset", data=points, fits=(fit_json,), output=out))
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_empty_csv_warns_and_exits_zero(self, tmp_path, caplog):
        empty = write_rows(tmp_path / "empty.csv", "N,alpha,bound", [])
        out = tmp_path / "empty.png"
        code = main([
            "render", "--kind", "bound-vs-alpha",
            "--data", str(empty), "--output", str(out),
        ])
        assert code == 0
        assert out.exists()

    def test_rendering_is_idempotent_and_read_only(self, tmp_path, bound_csv):
        out = tmp_path / "fig.png"
        before = digest(bound_csv)
        spec = FigureSpec(kind="bound-vs-alpha", data=bound_csv, output=out)
        render(spec)
        first = digest(out)
        render(spec)
        assert digest(out) == first
        assert digest(bound_csv) == before

    def test_vector_output_by_extension(self, tmp_path, bound_csv):
        out = tmp_path / "fig.svg"
        render(FigureSpec(kind="bound-vs-alpha", data=bound_csv, output=out))
        assert out.read_text().lstrip().startswith("<?xml")


class TestAcceptanceOutputs:
    """Criterion: figures regenerate from the simulator's acceptance outputs."""

    RESULTS = Path(__file__).resolve().parents[2] / "results" / "acceptance"

    def test_fig2_style_from_bound_and_gap_scans(self, tmp_path):
        bound = self.RESULTS / "ising" / "ising_bound.csv"
        gaps = self.RESULTS / "ising" / "gap_scan.csv"
        if not bound.exists() or not gaps.exists():
            pytest.skip("primary acceptance outputs not generated yet")
        out = tmp_path / "fig2_style.png"
        assert main([
            "render", "--kind", "bound-vs-alpha", "--data", str(bound),
            "--overlay", str(gaps), "--output", str(out),
        ]) == 0
        assert out.read_bytes()[:4] == PNG_MAGIC

    def test_fig3_style_from_disorder_summary(self, tmp_path):
        for model in ("sk", "3spin"):
            summary = self.RESULTS / model / "disorder_summary.csv"
            fit_peak = self.RESULTS / model / "fit_peak.json"
            fit_quench = self.RESULTS / model / "fit_quench.json"
            if not summary.exists() or not fit_peak.exists():
                pytest.skip("primary acceptance outputs not generated yet")
            out = tmp_path / f"fig3_style_{model}.png"
            args = ["render", "--kind", "gap-vs-alpha", "--data", str(summary),
                    "--fit", str(fit_peak)]
            if fit_quench.exists():
                args += ["--fit", str(fit_quench)]
            args += ["--output", str(out)]
            assert main(args) == 0
            assert out.read_bytes()[:4] == PNG_MAGIC
