"""Verification reports and their JSON / CSV / plot-table serializations."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..errors import DomainError

VERDICTS = ("pass", "fail", "inconclusive", "precondition-failed", "error")
CSV_COLUMNS = ["id", "subject", "n_or_family", "measured", "bound", "slack", "verdict"]


@dataclass
class VerificationReport:
    """``body`` is the reproducible record; ``timing`` is kept outside it."""

    body: dict
    timing: float = 0.0

    @property
    def id(self) -> str:
        return self.body["id"]

    @property
    def verdict(self) -> str:
        return self.body["verdict"]


def make_body(scenario, verdict, n_or_family=None, measured=None, bound=None, slack=None,
              details=None, notes=None) -> dict:
    return {
        "id": scenario.id,
        "subject": scenario.subject,
        "n_or_family": n_or_family,
        "measured": measured,
        "bound": bound,
        "slack": slack,
        "verdict": verdict,
        "details": details or {},
        "notes": list(notes or []),
        "tolerances": dict(scenario.tolerances),
        "seed": scenario.seed,
        "version": __version__,
    }


def worst_verdict(verdicts) -> str:
    order = {"error": 4, "fail": 3, "precondition-failed": 2, "inconclusive": 1, "pass": 0}
    vs = [v for v in verdicts if v in order]
    return max(vs, key=order.get) if vs else "pass"


@dataclass
class Summary:
    counts: dict = field(default_factory=lambda: {v: 0 for v in VERDICTS})

    @classmethod
    def of(cls, reports):
        s = cls()
        for r in reports:
            s.counts[r.verdict] = s.counts.get(r.verdict, 0) + 1
        return s

    @property
    def exit_code(self) -> int:
        if self.counts.get("error"):
            return 2
        if self.counts.get("fail"):
            return 1
        return 0


# ---------------------------------------------------------------- serialization

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def _esc(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return _esc(obj)
    if isinstance(obj, (bool, int, float, np.bool_, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ["%s%s: %s" % (pad, _esc(str(k)), dumps(v, indent, _level + 1)) for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_num(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError("cannot serialize %r" % type(obj))


def reports_to_json(reports, include_timing: bool = True) -> str:
    reports = sorted(reports, key=lambda r: r.id)
    doc = {
        "version": __version__,
        "summary": Summary.of(reports).counts,
        "reports": [r.body for r in reports],
    }
    if include_timing:
        doc["timing_seconds"] = {r.id: r.timing for r in reports}
    return dumps(doc) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _num(v) if math.isfinite(v) else ""
    return str(v)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(reports, key=lambda r: r.id):
        w.writerow([_cell(r.body.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


PLOT_SELECTORS = {
    "rotation": (("isometry",), ["id", "n", "measured", "two_pi_over_n", "one_over_n", "slack"]),
    "polytope": (("polytope", "gram"), ["id", "family", "k", "measured", "bound", "slack"]),
}


def emit_plot_data(reports, selector: str = "rotation") -> str:
    """Plot-ready CSV, one row per matching report."""
    if selector not in PLOT_SELECTORS:
        raise DomainError("unknown plot selector %r" % selector)
    subjects, cols = PLOT_SELECTORS[selector]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in sorted(reports, key=lambda r: r.id):
        b = r.body
        if b["subject"] not in subjects:
            raise DomainError("report %s (%s) does not match selector %r" % (b["id"], b["subject"], selector))
        if b["verdict"] in ("error", "precondition-failed"):
            continue
        if selector == "rotation":
            n = int(b["n_or_family"])
            w.writerow([b["id"], n, _cell(b["measured"]), _num(2 * math.pi / n), _num(1.0 / n), _cell(b["slack"])])
        else:
            d = b["details"]
            w.writerow([b["id"], d.get("family"), d.get("k"), _cell(b["measured"]), _cell(b["bound"]),
                        _cell(b["slack"])])
    return buf.getvalue()
