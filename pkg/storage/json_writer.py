"""
JSON Writer Module
Handles writing study summaries and result bundles to JSON files
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict

import config

logger = logging.getLogger(__name__)


class JSONWriter:
    """Handles writing data to JSON format"""

    def __init__(self, output_dir: Path = None):
        """
        Initialize JSON writer

        Args:
            output_dir: Output directory for JSON files
        """
        self.output_dir = Path(output_dir) if output_dir else config.REPORTS_OUTPUT_DIR
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _dump(self, data: Any, output_path: Path) -> Path:
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=str)
        return output_path

    def write_summary(self, summary: Dict[str, Any], filename: str = None) -> Path:
        """
        Write a study summary

        Args:
            summary: Summary dictionary (problem id, fingerprint, effective data, records, checks)
            filename: Optional custom filename (without extension)

        Returns:
            Path to written JSON file
        """
        if filename is None:
            filename = f"summary_{summary.get('problem_id', 'unknown')}"
        if not filename.endswith(".json"):
            filename += ".json"
        output_path = self.output_dir / filename

        try:
            self._dump(summary, output_path)
            logger.info(f"Wrote JSON summary: {output_path}")
            return output_path

        except Exception as e:
            logger.error(f"Error writing JSON summary {output_path}: {str(e)}")
            raise

    def write_config(self, serialized: Dict[str, Any], filename: str) -> Path:
        """Write the configuration that produced a run next to its results"""
        if not filename.endswith(".json"):
            filename += ".json"
        output_path = self.output_dir / filename

        try:
            with open(output_path, "w", encoding="utf-8") as f:
                json.dump(serialized, f, indent=2, sort_keys=True)
            logger.info(f"Wrote configuration: {output_path}")
            return output_path

        except Exception as e:
            logger.error(f"Error writing configuration {output_path}: {str(e)}")
            raise
