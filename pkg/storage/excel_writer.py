"""
Excel Writer Module
Handles writing study reports to Excel workbooks
"""
import logging
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd
from openpyxl.styles import Alignment, Font, PatternFill

import config

logger = logging.getLogger(__name__)


def _flatten(frame: pd.DataFrame) -> pd.DataFrame:
    """Lists and dictionaries become their text form; openpyxl writes scalars only"""
    return frame.apply(lambda column: column.map(lambda v: str(v) if isinstance(v, (list, dict, tuple)) else v))


class ExcelWriter:
    """Handles writing study reports to Excel format"""

    def __init__(self, output_dir: Path = None):
        """
        Initialize Excel writer

        Args:
            output_dir: Output directory for Excel files
        """
        self.output_dir = Path(output_dir) if output_dir else config.EXCEL_OUTPUT_DIR
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _format_worksheet(self, worksheet):
        """Format Excel worksheet with headers and styling"""
        header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
        header_font = Font(bold=True, color="FFFFFF")

        for cell in worksheet[1]:
            cell.fill = header_fill
            cell.font = header_font
            cell.alignment = Alignment(horizontal="center", vertical="center")

        # Auto-adjust column widths
        for column in worksheet.columns:
            column_letter = column[0].column_letter
            max_length = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            worksheet.column_dimensions[column_letter].width = min(max_length + 2, 50)

    def write_report(self, summary: Dict[str, Any], records: List[Dict[str, Any]],
                     checks: List[Dict[str, Any]], filename: str = "study_report.xlsx") -> Path:
        """
        Write a study report with Summary, Records and Checks sheets

        Args:
            summary: Flat metrics shown as Metric/Value pairs
            records: ConvergenceRecord dictionaries (one row each)
            checks: Threshold or property outcomes (one row each)
            filename: Output filename

        Returns:
            Path to written Excel file
        """
        if not filename.endswith(".xlsx"):
            filename += ".xlsx"
        output_path = self.output_dir / filename

        try:
            summary_df = pd.DataFrame({
                "Metric": list(summary.keys()),
                "Value": [str(value) if isinstance(value, (list, dict)) else value for value in summary.values()],
            })
            sheets = {"Summary": summary_df}
            if records:
                sheets["Records"] = _flatten(pd.DataFrame(records))
            if checks:
                sheets["Checks"] = _flatten(pd.DataFrame(checks))

            with pd.ExcelWriter(output_path, engine="openpyxl") as writer:
                for name, frame in sheets.items():
                    frame.to_excel(writer, sheet_name=name, index=False)
                    self._format_worksheet(writer.sheets[name])

            logger.info(f"Wrote study report Excel: {output_path}")
            return output_path

        except Exception as e:
            logger.error(f"Error writing study report Excel {output_path}: {str(e)}")
            raise
