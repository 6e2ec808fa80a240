"""Reading and writing the on-disk formats.

Inputs are schema-checked with ``jsonschema`` so that errors carry a field
path; numerical validation happens afterwards in the model layer.  Outputs are
written deterministically (sorted keys, ``repr`` floats, no timestamps) and
carry the SHA-256 of the inputs they were computed from.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, ParseError, SchemaError
from .model import EventStudy

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}
_INTS = {"type": "array", "items": {"type": "integer"}}

EVENT_STUDY_SCHEMA = {
    "type": "object",
    "required": ["beta_pre", "beta_post", "sigma"],
    "properties": {
        "pre_periods": _INTS,
        "post_periods": _INTS,
        "beta_pre": {**_VEC, "minItems": 1},
        "beta_post": {**_VEC, "minItems": 1},
        "sigma": _MAT,
    },
}

def _when(kind, props, required):
    return {
        "if": {"properties": {"type": {"const": kind}}},
        "then": {"properties": props, "required": required},
    }


PRIOR_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["random_walk", "ar1", "explicit"]}},
    "allOf": [
        _when("random_walk", {"mu": _NUM, "sigma2": _NUM}, ["mu", "sigma2"]),
        _when("ar1", {"rho": _NUM, "sigma_eps2": _NUM}, ["rho", "sigma_eps2"]),
        _when("explicit", {"mean": _VEC, "cov": _MAT}, ["mean", "cov"]),
    ],
}

_AXIS = {
    "type": "object",
    "required": ["min", "max", "n"],
    "properties": {"min": _NUM, "max": _NUM, "n": {"type": "integer", "minimum": 1}},
}

HYPER_SCHEMA = {
    "type": "object",
    "required": ["mu", "sigma"],
    "properties": {"mu": _AXIS, "sigma": _AXIS, "weights": {"const": "uniform"}},
}

SIMULATE_SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {"experiment": {"enum": ["coverage", "mle_consistency"]}, "seed": {"type": "integer"}},
    "allOf": [
        {
            "if": {"properties": {"experiment": {"const": "coverage"}}},
            "then": {
                "required": ["method", "n_pre", "n_post", "prior", "tau_post", "n_reps"],
                "properties": {
                    "method": {"enum": ["bayes_known_prior", "eb", "hierarchical", "ols"]},
                    "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "n_reps": {"type": "integer", "minimum": 100},
                    "n_pre": {"type": "integer", "minimum": 1},
                    "n_post": {"type": "integer", "minimum": 1},
                    "prior": PRIOR_SCHEMA,
                    "analysis_prior": PRIOR_SCHEMA,
                    "tau_post": _VEC,
                    "sigma": _MAT,
                    "sigma_scale": {"type": "number", "exclusiveMinimum": 0},
                    "hyper": HYPER_SCHEMA,
                },
                "oneOf": [{"required": ["sigma"]}, {"required": ["sigma_scale"]}],
            },
        },
        {
            "if": {"properties": {"experiment": {"const": "mle_consistency"}}},
            "then": {
                "required": ["true_mu", "true_sigma2", "sigma_scale", "n_pre_list", "n_reps"],
                "properties": {
                    "true_mu": _NUM,
                    "true_sigma2": {"type": "number", "minimum": 0},
                    "sigma_scale": {"type": "number", "exclusiveMinimum": 0},
                    "n_pre_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
                    "n_reps": {"type": "integer", "minimum": 1},
                },
            },
        },
    ],
}


def sha256_bytes(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(c)
    return h.hexdigest()


def read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None


def parse_json(data: bytes, source: str):
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{source}: not UTF-8 text ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def check_schema(doc, schema, source: str):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise SchemaError(f"{source}: {path}: {e.message}")
    return doc


def load_json(path, schema=None):
    """Parsed document plus the raw bytes it came from."""
    raw = read_bytes(path)
    doc = parse_json(raw, str(path))
    if schema is not None:
        check_schema(doc, schema, str(path))
    return doc, raw


def read_event_study_csv(est_data: bytes, cov_data: bytes, est_src="estimates", cov_src="covariance"):
    """Long-format estimates (``period,estimate``) plus a square covariance
    CSV ordered like the estimates sorted by period.  Headers are optional."""
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(est_data.decode("utf-8"))), start=1):
        if not row or row[0].strip().startswith("#"):
            continue
        if lineno == 1 and row[0].strip().lower() == "period":
            continue
        if len(row) < 2:
            raise ParseError(f"{est_src}: line {lineno}: expected columns period,estimate")
        try:
            rows.append((int(row[0]), float(row[1])))
        except ValueError:
            raise ParseError(f"{est_src}: line {lineno}: cannot parse {row[:2]!r} as (int, float)") from None
    rows.sort()
    periods = [p for p, _ in rows]
    values = [v for _, v in rows]

    cov = []
    for lineno, row in enumerate(csv.reader(io.StringIO(cov_data.decode("utf-8"))), start=1):
        if not row or row[0].strip().startswith("#"):
            continue
        try:
            cov.append([float(x) for x in row])
        except ValueError:
            if not cov and lineno == 1:
                continue  # header
            raise ParseError(f"{cov_src}: line {lineno}: non-numeric entry in {row!r}") from None
    pre = [p for p in periods if p < 0]
    post = [p for p in periods if p >= 0]
    k = len(pre)
    return EventStudy.from_dict(
        {
            "pre_periods": pre,
            "post_periods": post,
            "beta_pre": values[:k],
            "beta_post": values[k:],
            "sigma": cov,
        }
    )


def versions() -> dict:
    return {"bayestrends": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def fmt(x) -> str:
    return repr(float(x))


def table_csv(header, rows, input_hash: str | None = None) -> str:
    buf = io.StringIO()
    if input_hash is not None:
        buf.write(f"# input_sha256: {input_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_table_csv(text: str):
    """Rows of a report CSV as dicts, skipping ``#`` comment lines."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_text(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def sidecar_path(out) -> Path:
    out = Path(out)
    return out.with_suffix(".json") if out.suffix.lower() == ".csv" else out.with_name(out.name + ".json")
