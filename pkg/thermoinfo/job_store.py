"""File storage for job documents, result documents and flat estimator tables."""

import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from thermoinfo.errors import SchemaError

logger = logging.getLogger(__name__)

# Example jobs shipped with the repository
DATA_DIR = "data"
JOBS_DIR = os.path.join(DATA_DIR, "jobs")

INFINITY_TOKEN = "+inf"


def load_job(path):
    """Load a job document from a JSON file, or from stdin when path is "-"."""
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SchemaError(f"job file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise SchemaError(f"job file is not valid JSON: {e}") from None


def list_example_jobs():
    """Paths of the example jobs under data/jobs."""
    if not os.path.exists(JOBS_DIR):
        return []
    return sorted(os.path.join(JOBS_DIR, name) for name in os.listdir(JOBS_DIR) if name.endswith(".json"))


def to_plain(value):
    """Convert numpy values to JSON-ready Python values; +inf becomes the string "+inf"."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value) and value > 0:
            return INFINITY_TOKEN
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite value {value}")
        return value
    return value


def dump_result(document):
    """Serialize a result document; identical documents give identical text."""
    return json.dumps(to_plain(document), indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_result(document, path=None):
    """Write a result document to path, or to stdout when path is None."""
    text = dump_result(document)
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    with open(path, "w") as f:
        f.write(text)
    logger.info("wrote result document to %s", path)


def format_number(value):
    """17 significant digits, which round-trips every double."""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value) and value > 0:
            return INFINITY_TOKEN
        return format(value, ".17g")
    return str(value)


def dump_table(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def save_table(header, rows, path):
    """Write a comma-separated table with a header row."""
    with open(path, "w", newline="") as f:
        f.write(dump_table(header, rows))
    logger.info("wrote %d table rows to %s", len(rows), path)
