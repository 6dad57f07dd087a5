"""Unit tests for utils module."""

import logging

import pytest
from rich.logging import RichHandler

from mimlab.errors import ValidationError
from mimlab.utils import (
    configure_logging,
    format_number,
    parse_batches,
    parse_grid,
    space_indent,
)


@pytest.mark.unit
class TestSpaceIndent:
    """Tests for the space_indent function."""

    def test_space_indent_multiple_lines(self):
        """Test indenting multiple lines."""
        result = space_indent("Line 1\nLine 2")
        assert result == "    Line 1\n    Line 2"

    def test_space_indent_empty_lines(self):
        """Empty and whitespace-only lines stay empty."""
        result = space_indent("Line 1\n   \nLine 3")
        assert result.split("\n") == ["    Line 1", "", "    Line 3"]


@pytest.mark.unit
class TestFormatNumber:
    """Tests for locale-independent number output."""

    def test_twelve_significant_digits(self):
        assert format_number(2.57217220353512345) == "2.57217220354"

    def test_whole_number(self):
        assert format_number(1.0) == "1.0"
        assert format_number(-2.0) == "-2.0"

    def test_undefined(self):
        assert format_number(None) == "undefined"

    def test_small_and_large(self):
        assert format_number(1e-10) == "1e-10"
        assert format_number(1e10) == "10000000000.0"

    def test_custom_digits(self):
        assert format_number(3.14159265, digits=3) == "3.14"


@pytest.mark.unit
class TestParseBatches:
    """Tests for the batch schedule parser."""

    def test_size_times_count(self):
        assert parse_batches("1000x10") == [1000] * 10

    def test_comma_list(self):
        assert parse_batches("500, 1000,2000") == [500, 1000, 2000]

    def test_single_batch(self):
        assert parse_batches("7") == [7]

    @pytest.mark.parametrize("text", ["", "abc", "10x", "0x3", "5,-1", "1.5x2"])
    def test_invalid(self, text):
        with pytest.raises(ValidationError) as excinfo:
            parse_batches(text)
        assert excinfo.value.field == "batches"


@pytest.mark.unit
class TestParseGrid:
    """Tests for the start:stop:step parser."""

    def test_inclusive_grid(self):
        grid = parse_grid("0.02:0.45:0.01")
        assert len(grid) == 44
        assert grid[0] == 0.02
        assert grid[-1] == 0.45
        assert grid[10] == 0.12

    def test_single_point(self):
        assert parse_grid("0.1:0.1:0.05") == [0.1]

    @pytest.mark.parametrize("text", ["0.1:0.2", "a:b:c", "0.1:0.2:0", "0.3:0.2:0.1"])
    def test_invalid(self, text):
        with pytest.raises(ValidationError, match="grid"):
            parse_grid(text)


@pytest.mark.unit
class TestConfigureLogging:
    """Tests for the package logger setup."""

    def test_installs_single_rich_handler(self):
        configure_logging("INFO")
        configure_logging("INFO")
        logger = logging.getLogger("mimlab")
        handlers = [h for h in logger.handlers if isinstance(h, RichHandler)]
        assert len(handlers) == 1
        assert logger.propagate is False

    def test_explicit_level(self):
        configure_logging("debug")
        assert logging.getLogger("mimlab").level == logging.DEBUG

    def test_level_from_environment(self, monkeypatch):
        monkeypatch.setenv("MIMLAB_LOG_LEVEL", "error")
        configure_logging()
        assert logging.getLogger("mimlab").level == logging.ERROR
