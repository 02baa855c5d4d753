import json
import os
import tempfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqeval.core import (
    MetricHeader,
    MetricResult,
    PropertyColumn,
    PropertyTable,
    ReportTable,
    SequenceSet,
    TrajectoryTable,
)
from seqeval.formats import (
    load_embeddings_binary,
    load_embeddings_csv,
    load_properties_csv,
    load_run_config,
    load_sequences,
    save_embeddings_binary,
    save_embeddings_csv,
    save_properties_csv,
    save_sequences,
    sniff_embedding_format,
)
from seqeval.report import (
    ChartSpec,
    format_cell,
    render_chart,
    render_scatter,
    render_table,
    report_from_json,
    report_to_json,
    trajectory_to_csv,
    trajectory_to_json,
)


class TestSequenceFiles:
    def test_plain_round_trip_preserves_order_and_duplicates(self, tmp_path):
        p = tmp_path / "seqs.txt"
        seqs = SequenceSet("g", ["BB", "AA", "BB"])
        save_sequences(seqs, str(p))
        back = load_sequences(str(p), name="g")
        assert list(back) == ["BB", "AA", "BB"]

    def test_fasta_with_wrapped_bodies(self, tmp_path):
        p = tmp_path / "seqs.fasta"
        p.write_text(">one\nABC\nDEF\n>two\nGGG\n")
        back = load_sequences(str(p))
        assert list(back) == ["ABCDEF", "GGG"]

    def test_crlf_and_trailing_whitespace_tolerated(self, tmp_path):
        p = tmp_path / "seqs.txt"
        p.write_bytes(b"AB \r\nCD\r\n")
        assert list(load_sequences(str(p))) == ["AB", "CD"]

    def test_empty_file_errors(self, tmp_path):
        p = tmp_path / "seqs.txt"
        p.write_text("\n\n")
        with pytest.raises(ValueError, match="no sequences"):
            load_sequences(str(p))

    def test_fasta_empty_body_errors(self, tmp_path):
        p = tmp_path / "seqs.fasta"
        p.write_text(">one\n>two\nAAA\n")
        with pytest.raises(ValueError, match="one"):
            load_sequences(str(p))


class TestBinaryEmbeddings:
    def test_header_layout_is_bit_exact(self, tmp_path):
        p = tmp_path / "m.bin"
        save_embeddings_binary(np.array([[1.0, 2.0]], dtype=np.float32), str(p))
        raw = p.read_bytes()
        assert raw[:4] == b"SQME"
        assert raw[4] == 1  # version
        assert raw[5] == 1  # f32 little-endian element type
        assert int.from_bytes(raw[6:14], "little") == 1  # rows
        assert int.from_bytes(raw[14:22], "little") == 2  # cols
        assert raw[22:26] == np.float32(1.0).tobytes()
        assert len(raw) == 22 + 8

    def test_round_trip_exact_for_f32_values(self, tmp_path):
        p = tmp_path / "m.bin"
        data = np.array([[0.5, -2.25], [3.75, 1024.0]])  # exactly representable
        save_embeddings_binary(data, str(p))
        back = load_embeddings_binary(str(p))
        assert np.array_equal(back.data, data)

    def test_bad_magic_names_byte_offset(self, tmp_path):
        p = tmp_path / "m.bin"
        save_embeddings_binary(np.zeros((1, 1)), str(p))
        raw = bytearray(p.read_bytes())
        raw[:4] = b"NOPE"
        p.write_bytes(bytes(raw))
        with pytest.raises(ValueError, match="byte 0"):
            load_embeddings_binary(str(p))

    def test_bad_version_names_byte_offset(self, tmp_path):
        p = tmp_path / "m.bin"
        save_embeddings_binary(np.zeros((1, 1)), str(p))
        raw = bytearray(p.read_bytes())
        raw[4] = 9
        p.write_bytes(bytes(raw))
        with pytest.raises(ValueError, match="byte 4"):
            load_embeddings_binary(str(p))

    def test_truncated_payload_reports_counts(self, tmp_path):
        p = tmp_path / "m.bin"
        save_embeddings_binary(np.zeros((2, 3)), str(p))
        raw = p.read_bytes()
        p.write_bytes(raw[:-4])
        with pytest.raises(ValueError, match="expected 24"):
            load_embeddings_binary(str(p))

    def test_sniffer(self, tmp_path):
        b = tmp_path / "m.bin"
        save_embeddings_binary(np.zeros((1, 1)), str(b))
        c = tmp_path / "m.csv"
        save_embeddings_csv(np.zeros((1, 1)), str(c))
        assert sniff_embedding_format(str(b)) == "binary"
        assert sniff_embedding_format(str(c)) == "csv"


class TestCsvEmbeddings:
    def test_round_trip_is_double_exact(self, tmp_path):
        p = tmp_path / "m.csv"
        data = np.array([[1 / 3, np.pi], [-0.1, 2e-17]])
        save_embeddings_csv(data, str(p))
        back = load_embeddings_csv(str(p))
        assert np.array_equal(back.data, data)

    def test_header_line(self, tmp_path):
        p = tmp_path / "m.csv"
        save_embeddings_csv(np.zeros((2, 3)), str(p))
        assert p.read_text().splitlines()[0] == "dim=3"

    def test_wrong_cell_count_names_line(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("dim=2\n1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="line 3"):
            load_embeddings_csv(str(p))

    def test_bad_number_names_line_and_column(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("dim=2\n1.0,oops\n")
        with pytest.raises(ValueError, match="line 2, column 2"):
            load_embeddings_csv(str(p))

    def test_missing_dim_header(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("1.0,2.0\n")
        with pytest.raises(ValueError, match="dim="):
            load_embeddings_csv(str(p))

    @given(
        st.lists(
            st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=2, max_size=2),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=30)
    def test_round_trip_property(self, rows):
        with tempfile.TemporaryDirectory() as d:
            p = os.path.join(d, "m.csv")
            data = np.array(rows, dtype=np.float64)
            save_embeddings_csv(data, p)
            assert np.array_equal(load_embeddings_csv(p).data, data)


class TestPropertyCsv:
    def _table(self):
        return PropertyTable(
            [
                PropertyColumn("score", "real", np.array([0.5, 1.25])),
                PropertyColumn("hit", "binary", np.array([1.0, 0.0])),
                PropertyColumn("family", "categorical", ["amp", "other"]),
                PropertyColumn("e", "vec", np.array([[1.0, 2.0], [3.0, 4.0]])),
            ]
        )

    def test_round_trip(self, tmp_path):
        p = tmp_path / "props.csv"
        save_properties_csv(self._table(), str(p))
        back = load_properties_csv(str(p))
        assert back.column_names() == ["score", "hit", "family", "e"]
        assert back.column("score").values.tolist() == [0.5, 1.25]
        assert back.column("hit").kind == "binary"
        assert back.column("family").values == ["amp", "other"]
        assert back.column("e").values.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_header_cells(self, tmp_path):
        p = tmp_path / "props.csv"
        save_properties_csv(self._table(), str(p))
        header = p.read_text().splitlines()[0]
        assert header == "score:real,hit:binary,family:categorical,e[0]:vec<2>,e[1]:vec<2>"

    def test_unknown_type_token(self, tmp_path):
        p = tmp_path / "props.csv"
        p.write_text("score:floaty\n1.0\n")
        with pytest.raises(ValueError, match="floaty"):
            load_properties_csv(str(p))

    def test_vec_cells_out_of_order(self, tmp_path):
        p = tmp_path / "props.csv"
        p.write_text("e[1]:vec<2>,e[0]:vec<2>\n1.0,2.0\n")
        with pytest.raises(ValueError, match="out of order"):
            load_properties_csv(str(p))

    def test_vec_width_mismatch(self, tmp_path):
        p = tmp_path / "props.csv"
        p.write_text("e[0]:vec<2>\n1.0\n")
        with pytest.raises(ValueError, match="width 2"):
            load_properties_csv(str(p))

    def test_binary_validation_names_file(self, tmp_path):
        p = tmp_path / "props.csv"
        p.write_text("hit:binary\n0.5\n")
        with pytest.raises(ValueError, match="props.csv"):
            load_properties_csv(str(p))

    def test_bad_cell_count(self, tmp_path):
        p = tmp_path / "props.csv"
        p.write_text("a:real,b:real\n1.0\n")
        with pytest.raises(ValueError, match="line 2"):
            load_properties_csv(str(p))


class TestRunConfig:
    def _write(self, tmp_path, doc):
        p = tmp_path / "config.json"
        p.write_text(json.dumps(doc))
        return str(p)

    def _minimal(self):
        return {
            "config_version": 1,
            "groups": {"g": "seqs.txt"},
            "metrics": [{"name": "uniqueness"}],
        }

    def test_minimal_loads(self, tmp_path):
        cfg = load_run_config(self._write(tmp_path, self._minimal()))
        assert cfg.groups == {"g": "seqs.txt"}
        assert cfg.metrics[0]["name"] == "uniqueness"
        assert cfg.base_dir == str(tmp_path)

    def test_wrong_version_rejected(self, tmp_path):
        doc = self._minimal()
        doc["config_version"] = 2
        with pytest.raises(Exception, match="config_version"):
            load_run_config(self._write(tmp_path, doc))

    def test_bad_fold_entry_names_location(self, tmp_path):
        doc = self._minimal()
        doc["metrics"].append({"name": "diversity", "fold": {"K": 1}})
        with pytest.raises(Exception, match=r"metrics\[1\]"):
            load_run_config(self._write(tmp_path, doc))

    def test_unknown_representation_kind(self, tmp_path):
        doc = self._minimal()
        doc["representations"] = {"r": {"kind": "quantum"}}
        with pytest.raises(Exception, match="kind"):
            load_run_config(self._write(tmp_path, doc))

    def test_metrics_must_be_nonempty(self, tmp_path):
        doc = self._minimal()
        doc["metrics"] = []
        with pytest.raises(Exception, match="metrics"):
            load_run_config(self._write(tmp_path, doc))

    def test_iterations_parsed(self, tmp_path):
        doc = self._minimal()
        doc["iterations"] = [
            {"index": 1, "groups": {"g": "r1.txt"}},
            {"index": 2, "groups": {"g": "r2.txt"}},
        ]
        cfg = load_run_config(self._write(tmp_path, doc))
        assert [it["index"] for it in cfg.iterations] == [1, 2]


def _report():
    headers = [
        MetricHeader("up", "maximize"),
        MetricHeader("down", "minimize"),
        MetricHeader("spread", "maximize", "mean-and-deviation"),
    ]
    cells = {
        ("g1", "up"): MetricResult(value=0.5),
        ("g1", "down"): MetricResult(value=1.0),
        ("g1", "spread"): MetricResult(value=2.0, deviation=1.0, per_fold=[1.0, 2.0, 3.0]),
        ("g2", "up"): MetricResult(value=None, error="exploded"),
        ("g2", "down"): MetricResult(value=0.123456789),
        ("g2", "spread"): MetricResult(value=1.0, deviation=0.0, per_fold=[1.0, 1.0]),
    }
    return ReportTable(["g1", "g2"], headers, cells)


class TestReportRendering:
    def test_format_cell_fixed_decimals(self):
        assert format_cell(MetricResult(value=0.5)) == "0.5000"
        assert format_cell(MetricResult(value=1.0)) == "1.0000"
        assert format_cell(MetricResult(value=2.0, deviation=1.0, per_fold=[1.0, 2.0, 3.0])) == "2.0000 ± 1.0000"
        assert format_cell(MetricResult(value=None, error="x")) == "ERR"

    def test_markdown_table(self):
        text = render_table(_report(), format="markdown")
        lines = text.splitlines()
        assert lines[0] == "| Group | up ↑ | down ↓ | spread ↑ |"
        assert lines[1] == "| --- | --- | --- | --- |"
        assert lines[2] == "| g1 | 0.5000 | 1.0000 | 2.0000 ± 1.0000 |"
        assert lines[3] == "| g2 | ERR | 0.1235 | 1.0000 ± 0.0000 |"

    def test_csv_table(self):
        text = render_table(_report(), format="csv")
        lines = text.splitlines()
        assert lines[0].startswith("Group,")
        assert "ERR" in lines[2]

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_table(_report(), format="yaml")

    def test_json_round_trip_is_exact(self):
        rpt = _report()
        back = report_from_json(report_to_json(rpt))
        assert back.group_names == rpt.group_names
        assert [h.name for h in back.metrics] == [h.name for h in rpt.metrics]
        assert back.cell("g2", "down").value == rpt.cell("g2", "down").value  # exact doubles
        assert back.cell("g1", "spread").per_fold == rpt.cell("g1", "spread").per_fold
        assert back.cell("g2", "up").error == "exploded"

    def test_json_is_stable_across_serializations(self):
        a = report_to_json(_report())
        b = report_to_json(report_from_json(a))
        assert a == b


def _trajectory():
    def table(v):
        return ReportTable(
            ["g"],
            [MetricHeader("m", "maximize")],
            {("g", "m"): MetricResult(value=v)},
        )

    return TrajectoryTable([(1, table(0.25)), (2, table(0.75))])


class TestTrajectorySerialization:
    def test_csv_layout(self):
        text = trajectory_to_csv(_trajectory())
        lines = text.splitlines()
        assert lines[0] == "iteration,group,metric,value,deviation"
        assert lines[1].startswith("1,g,m,0.25")
        assert lines[2].startswith("2,g,m,0.75")

    def test_json_round_trip(self):
        doc = json.loads(trajectory_to_json(_trajectory()))
        assert [e["iteration"] for e in doc] == [1, 2]
        assert doc[0]["report"]["groups"] == ["g"]


class TestCharts:
    def test_bar_chart_structure(self):
        svg = render_chart(_report(), ChartSpec(kind="bar", metrics=["down", "spread"]))
        assert svg.startswith("<svg")
        assert svg.count('class="bar"') == 4  # 2 groups x 2 error-free metrics
        assert "<title>" in svg

    def test_charting_an_error_cell_raises(self):
        with pytest.raises(ValueError, match="error cell"):
            render_chart(_report(), ChartSpec(kind="bar", metrics=["up"]))

    def test_bar_chart_deterministic(self):
        spec = ChartSpec(kind="bar", metrics=["down"])
        assert render_chart(_report(), spec) == render_chart(_report(), spec)

    def test_parallel_coordinates_structure(self):
        # drop the error cell: parallel coordinates need complete rows
        headers = [MetricHeader("a", "maximize"), MetricHeader("b", "minimize")]
        cells = {
            ("g1", "a"): MetricResult(value=0.1),
            ("g1", "b"): MetricResult(value=0.9),
            ("g2", "a"): MetricResult(value=0.4),
            ("g2", "b"): MetricResult(value=0.2),
        }
        rpt = ReportTable(["g1", "g2"], headers, cells)
        svg = render_chart(rpt, ChartSpec(kind="parallel-coordinates"))
        assert svg.count('class="axis"') == 2
        assert svg.count('class="series"') == 2

    def test_trajectory_chart_structure(self):
        svg = render_chart(_trajectory(), ChartSpec(kind="trajectory"))
        assert svg.count('class="trajectory"') == 1
        # one vertex per iteration on the single polyline
        poly = [ln for ln in svg.splitlines() if "trajectory" in ln][0]
        points = poly.split('points="')[1].split('"')[0].strip().split(" ")
        assert len(points) == 2

    def test_scatter_points(self):
        coords = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]])
        svg = render_scatter(coords, labels=["a", "b", "a"])
        assert svg.count('class="point"') == 3

    def test_chart_size_validation(self):
        with pytest.raises(ValueError):
            ChartSpec(kind="bar", width=50)

    def test_unknown_chart_kind(self):
        with pytest.raises(ValueError):
            ChartSpec(kind="pie")
