"""
Reader for evaluation report files.
"""

from pathlib import Path
from typing import Union

from rulegate.models.report import EvalReport
from rulegate.readers.config_reader import ConfigReader


class ReportReader:
    """
    Reader for EvalReport JSON files written by ReportWriter.
    """

    @staticmethod
    def read(report_path: Union[str, Path]) -> EvalReport:
        return ConfigReader.read(report_path, EvalReport)
