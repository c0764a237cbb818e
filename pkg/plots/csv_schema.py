"""CSV contracts shared by the figure scripts.

The simulator and threshold tools emit plain CSV with `# key=value` comment
lines before the header.  Readers here validate the header columns up front
and fail with the missing column names, so a schema drift surfaces as a clear
message instead of a KeyError somewhere inside matplotlib.
"""

import csv

SIM_COLUMNS = (
    "ebn0_db", "frames", "info_bits", "parity_bits", "info_bit_errors",
    "parity_bit_errors", "frame_errors", "ber_info", "ber_parity", "ber_all",
    "ci95_half_width", "seed",
)
THRESHOLD_COLUMNS = (
    "code", "label", "L", "actual_rate", "capacity_db", "threshold_db",
    "gap_db",
)
_NUMERIC_SIM = {c: float for c in SIM_COLUMNS}
_NUMERIC_THRESHOLD = {"L": float, "actual_rate": float, "capacity_db": float,
                      "threshold_db": float, "gap_db": float}


class SchemaError(Exception):
    """Raised when a CSV does not match the expected column contract."""


def _read(path, required, converters):
    comments = {}
    with open(path, newline="", encoding="utf-8") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    comments[key.strip()] = val.strip()
            elif line.strip():
                data_lines.append(line)
    if not data_lines:
        raise SchemaError(f"{path}: no header row found")
    reader = csv.DictReader(data_lines)
    missing = [c for c in required if c not in (reader.fieldnames or ())]
    if missing:
        raise SchemaError(
            f"{path}: missing required column(s) {', '.join(missing)}; "
            f"found {', '.join(reader.fieldnames or ())}")
    rows = []
    for row in reader:
        out = dict(row)
        for col, conv in converters.items():
            if col in out:
                try:
                    out[col] = conv(out[col])
                except ValueError as e:
                    raise SchemaError(
                        f"{path}: column {col} holds non-numeric value "
                        f"{out[col]!r}") from e
        rows.append(out)
    return rows, comments


def read_sim_csv(path):
    """Rows + comment dict of a simulator BER CSV."""
    return _read(path, SIM_COLUMNS, _NUMERIC_SIM)


def read_threshold_csv(path):
    """Rows + comment dict of a threshold-table CSV."""
    return _read(path, THRESHOLD_COLUMNS, _NUMERIC_THRESHOLD)
