"""Report files: JSON, CSV mirror and optional SVG plots.

All files are written to a temporary name in the target directory and
renamed into place, so a reader never sees a partial report.  JSON output
uses sorted keys and ``repr`` floats; NaN and infinities become ``null``.
"""

import csv
import io
import json
import math
import os
import tempfile

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path, data, mode="w"):
    """Write ``data`` to ``path`` via a temporary file and ``os.replace``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode + ("b" if isinstance(data, bytes) else ""),
                       **({} if isinstance(data, bytes) else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, to_json(obj))


def rows_to_csv(rows, columns=None) -> str:
    rows = [_clean(r) for r in rows]
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def write_csv(path, rows, columns=None):
    atomic_write(path, rows_to_csv(rows, columns))


def ladder_rows(report_dict):
    """One CSV row per (T, statistic) from a CLT report dictionary."""
    rows = []
    for rec in report_dict["ladder"]:
        for stat in ("k2", "k3", "k4"):
            rows.append({"T": rec["T"], "statistic": stat, "estimate": rec[stat]["est"],
                         "se": rec[stat]["se"]})
        rows.append({"T": rec["T"], "statistic": "sigma2_theory", "estimate": rec["sigma2_theory"], "se": None})
        rows.append({"T": rec["T"], "statistic": "sigma2_finite", "estimate": rec["sigma2_finite"], "se": None})
        rows.append({"T": rec["T"], "statistic": "dkol", "estimate": rec["dkol"], "se": rec["dkol_se"]})
        rows.append({"T": rec["T"], "statistic": "berry_esseen", "estimate": rec["berry_esseen"],
                     "se": rec["berry_esseen_se"]})
    return rows


def write_loglog_svg(path, T, series, title, ylabel):
    """Log-log line plot of ``series`` (name -> values) against ``T``.

    The SVG is reproducible: the hash salt is fixed and no date is embedded.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fieldclt", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for name, values in series.items():
            ax.loglog(T, values, marker="o", label=name)
        ax.set_xlabel("T")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    atomic_write(path, buf.getvalue())
