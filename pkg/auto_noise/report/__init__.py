"""
报告模块
"""

from auto_noise.report.generator import (
    ReportGenerator,
    write_correlation_csv,
    write_fraction_csv,
    write_sector_diff_csv,
    write_summary_json,
)

__all__ = [
    "ReportGenerator",
    "write_correlation_csv",
    "write_fraction_csv",
    "write_sector_diff_csv",
    "write_summary_json",
]
