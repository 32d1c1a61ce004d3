"""
CSV Writer Module
Writes study rows as versioned, plot-ready CSV tables
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

import config

logger = logging.getLogger(__name__)


def schema_header() -> str:
    return f"# schema_version={config.CSV_SCHEMA_VERSION}\n"


def rows_to_frame(rows: List[Dict[str, Any]], extra_columns: Optional[List[str]] = None) -> pd.DataFrame:
    """Fixed schema columns first, then the requested extras; missing cells are NaN"""
    columns = list(config.CSV_COLUMNS) + [c for c in (extra_columns or []) if c not in config.CSV_COLUMNS]
    frame = pd.DataFrame(rows)
    return frame.reindex(columns=columns)


class CSVWriter:
    """Handles writing study results to CSV format"""

    def __init__(self, output_dir: Path = None):
        """
        Initialize CSV writer

        Args:
            output_dir: Output directory for CSV files
        """
        self.output_dir = Path(output_dir) if output_dir else config.CSV_OUTPUT_DIR
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_rows(self, rows: List[Dict[str, Any]], filename: str,
                   extra_columns: Optional[List[str]] = None) -> Path:
        """
        Write study rows under the schema-version header

        Args:
            rows: One dictionary per measurement
            filename: Output filename
            extra_columns: Study-specific columns appended after the fixed schema

        Returns:
            Path to written CSV file
        """
        if not filename.endswith(".csv"):
            filename += ".csv"
        output_path = self.output_dir / filename

        try:
            frame = rows_to_frame(rows, extra_columns)
            with open(output_path, "w", encoding="utf-8", newline="") as f:
                f.write(schema_header())
                frame.to_csv(f, index=False, float_format=config.CSV_FLOAT_FORMAT, lineterminator="\n")
            logger.info(f"Wrote CSV file with {len(frame)} rows: {output_path}")
            return output_path

        except Exception as e:
            logger.error(f"Error writing CSV file {output_path}: {str(e)}")
            raise


def read_rows(path: Path) -> pd.DataFrame:
    """Read a results table back, checking its schema version"""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline()
    if header != schema_header():
        raise ValueError(f"{path} has schema header {header.strip()!r}, expected {schema_header().strip()!r}")
    return pd.read_csv(path, skiprows=1)
