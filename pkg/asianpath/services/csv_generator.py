import csv
import io
import math
from typing import Iterable, Optional


class CSVGenerator:
    """Comma-separated tables with a header row, LF endings and 17-digit floats."""

    COLUMNS: list[str] = []

    @staticmethod
    def _fmt_num(val):
        if val is None:
            return ""
        if isinstance(val, bool):
            return str(val).lower()
        if isinstance(val, int):
            return str(val)
        f = float(val)
        if math.isnan(f):
            return "nan"
        # 17 significant digits round-trip every double
        return "%.17g" % f

    @classmethod
    def generate(cls, rows: Iterable[dict], columns: Optional[list[str]] = None) -> str:
        fieldnames = columns or cls.COLUMNS
        output = io.StringIO()
        writer = csv.DictWriter(output, fieldnames=fieldnames, delimiter=",", lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: cls._fmt_num(row.get(key)) for key in fieldnames})
        return output.getvalue()


class SweepCSVGenerator(CSVGenerator):
    COLUMNS = ["param_value", "rho", "analytic_value", "mc_value", "mc_std_error"]


class HistogramCSVGenerator(CSVGenerator):
    COLUMNS = ["bin_left", "bin_right", "exact_mass", "approx_mass"]
