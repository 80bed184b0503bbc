"""Deterministic JSON rendering for reports and structured files.

Reports must be byte-identical for identical inputs, so floats are
rendered with a fixed 9-significant-digit format and dict keys keep
their insertion order. Data files that must round-trip exactly (CSV
records, histories) use shortest round-trip formatting instead; see
format_data_float.
"""

import json
import math


def format_report_float(x):
    """Fixed-width float used in reports: 9 significant digits."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value in report: %r" % x)
    if x == 0.0:
        return "0"  # avoid -0
    return "%.9g" % x


def format_data_float(x):
    """Shortest decimal that round-trips to the same float64."""
    x = float(x)  # numpy scalars repr as np.float64(...)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value in data file: %r" % x)
    return repr(x)


def dumps(obj, indent=2, floats="report"):
    """Render a JSON document with deterministic float formatting.

    Accepts dicts (insertion order preserved), lists, strings, ints,
    floats, bools and None. floats='report' renders 9 significant
    digits; floats='data' renders shortest round-trip decimals for
    files that must re-load exactly. Returns text ending in a newline.
    """
    fmt = {"report": format_report_float, "data": format_data_float}[floats]
    out = []
    _render(obj, out, indent, 0, fmt)
    out.append("\n")
    return "".join(out)


def _render(obj, out, indent, depth, fmt=format_report_float):
    pad = " " * (indent * depth)
    inner = " " * (indent * (depth + 1))
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError("JSON object keys must be strings: %r" % k)
            out.append(inner + json.dumps(k) + ": ")
            _render(v, out, indent, depth + 1, fmt)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seq):
            # numeric vectors stay on one line; keeps reports compact
            parts = [fmt(v) if isinstance(v, float) else str(v) for v in seq]
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(inner)
            _render(v, out, indent, depth + 1, fmt)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError("cannot render %r in a report" % type(obj))


def loads(text):
    return json.loads(text)
