# ===============================
# EXCEL EXPORT
# ===============================
"""
Writes a suite report to an Excel workbook: summary, step statistics and violations
"""
import pandas as pd
from openpyxl.utils import get_column_letter

from system import config_loader


def autosize_columns(writer):
    """Auto-adjust column widths for all sheets."""
    for sheet_name in writer.sheets:
        worksheet = writer.sheets[sheet_name]
        for column in worksheet.columns:
            max_length = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            column_letter = get_column_letter(column[0].column)
            worksheet.column_dimensions[column_letter].width = min(max_length + 2, 60)


def export_to_excel(summary, statistics, violations, filename=None):
    """
    Export a suite run to one workbook.

    Args:
        summary: dict of report fields (config echo, counts, wall time)
        statistics: DataFrame from StepStatistics.summary()
        violations: list of {"kind", "detail", "trace"} dicts

    Returns:
        Boolean success status
    """
    filename = filename or config_loader.OUTPUT_EXCEL
    try:
        print(f"\nExporting to Excel file: {filename}")
        summary_df = pd.DataFrame([{"field": k, "value": str(v)} for k, v in summary.items()])
        violations_df = pd.DataFrame(violations, columns=["kind", "detail", "trace"])

        with pd.ExcelWriter(filename, engine='openpyxl') as writer:
            summary_df.to_excel(writer, sheet_name='summary', index=False)
            statistics.to_excel(writer, sheet_name='step statistics', index=False)
            violations_df.to_excel(writer, sheet_name='violations', index=False)
            autosize_columns(writer)

        print(f"  - summary: {len(summary_df)} rows")
        print(f"  - step statistics: {len(statistics)} rows")
        print(f"  - violations: {len(violations_df)} rows")
        print(f"  ✓ Excel file created successfully")
        return True

    except Exception as e:
        print(f"\n❌ Error exporting to Excel: {e}")
        return False
