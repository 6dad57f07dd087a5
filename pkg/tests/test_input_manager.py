"""Unit tests for input_manager module."""

import pandas as pd
import pytest

from mimlab.errors import ValidationError
from mimlab.input_manager import (
    dumps_json,
    ensure_directory,
    read_counts,
    read_json_source,
    read_text,
    table_to_csv,
    write_json,
    write_table,
)

# ============================================================================
# JSON Tests
# ============================================================================


@pytest.mark.unit
class TestReadJsonSource:
    """Tests for inline-or-path JSON decoding."""

    def test_inline_object(self):
        assert read_json_source('{"M": 3}') == {"M": 3}

    def test_inline_with_leading_whitespace(self):
        assert read_json_source('  {"M": 3}') == {"M": 3}

    def test_from_file(self, temp_json_file):
        path = temp_json_file("spec.json", '{"probs": [0.5, 0.5]}')
        assert read_json_source(str(path)) == {"probs": [0.5, 0.5]}

    def test_missing_file(self):
        with pytest.raises(ValidationError, match="No such file"):
            read_json_source("missing.json")

    def test_invalid_json_names_field(self, temp_json_file):
        path = temp_json_file("bad.json", "{not json")
        with pytest.raises(ValidationError) as excinfo:
            read_json_source(str(path), field="model")
        assert excinfo.value.field == "model"

    def test_rejects_non_object(self, temp_json_file):
        path = temp_json_file("list.json", "[1, 2]")
        with pytest.raises(ValidationError, match="JSON object"):
            read_json_source(str(path))

    def test_read_text_unicode(self, temp_json_file):
        path = temp_json_file("note.json", '{"name": "分布"}')
        assert "分布" in read_text(str(path))


@pytest.mark.unit
class TestJsonOutput:
    def test_dumps_keeps_key_order(self):
        text = dumps_json({"b": 1, "a": 2})
        assert text.index('"b"') < text.index('"a"')

    def test_dumps_null_for_none(self):
        assert '"L_hat": null' in dumps_json({"L_hat": None})

    def test_write_json_ends_with_newline(self, tmp_path):
        path = tmp_path / "out.json"
        write_json({"seed": 1}, str(path))
        assert path.read_text().endswith("}\n")


# ============================================================================
# CSV Tests
# ============================================================================


@pytest.mark.unit
class TestTables:
    def test_csv_missing_value_is_empty(self):
        frame = pd.DataFrame({"p_hat": [0.0, 0.5], "L_hat": [None, 1.0]})
        frame["L_hat"] = frame["L_hat"].astype(float)
        assert table_to_csv(frame) == "p_hat,L_hat\n0.0,\n0.5,1.0\n"

    def test_write_table_uses_unix_newlines(self, tmp_path):
        path = tmp_path / "t.csv"
        write_table(pd.DataFrame({"i": [1, 2]}), str(path))
        assert path.read_bytes() == b"i\n1\n2\n"

    def test_read_counts(self, counts_csv):
        path = counts_csv([(1, 10), (0, 20)])
        assert read_counts(str(path)) == [(1, 10), (0, 20)]

    def test_read_counts_accepts_tracker_export(self, counts_csv):
        header = "i,delta_n,delta_N,n,N,p_hat,L_hat"
        path = counts_csv([(1, 2, 10, 2, 10, 0.2, 2.0)], header=header)
        assert read_counts(str(path)) == [(2, 10)]

    def test_read_counts_missing_column(self, counts_csv):
        path = counts_csv([(1, 10)], header="delta_n,trials")
        with pytest.raises(ValidationError, match="delta_N"):
            read_counts(str(path))

    def test_read_counts_non_integer(self, counts_csv):
        path = counts_csv([(1.5, 10)])
        with pytest.raises(ValidationError, match="row 1"):
            read_counts(str(path))

    def test_read_counts_blank_value(self, counts_csv):
        path = counts_csv([("", 10)])
        with pytest.raises(ValidationError, match="row 1"):
            read_counts(str(path))

    def test_read_counts_missing_file(self):
        with pytest.raises(ValidationError) as excinfo:
            read_counts("nope.csv")
        assert excinfo.value.field == "counts"

    def test_ensure_directory(self, tmp_path):
        target = tmp_path / "a" / "b"
        assert ensure_directory(str(target)) == str(target)
        assert target.is_dir()

    def test_ensure_directory_over_file(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ValidationError, match="output directory"):
            ensure_directory(str(blocker / "sub"))
