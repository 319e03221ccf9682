"""Canonical JSON model documents.

Schema version 1:

    {
      "schema_version": 1,
      "n": <int>,
      "gamma": <float>,
      "saps": [{"state": <int>, "reward": <float>, "probs": [<float>, ...]}, ...]
    }

Emission is canonical: fixed key order, SAPs in index order, reals printed
as Python's shortest round-trip decimals (at most 17 significant digits),
two-space indentation, trailing newline. Equal models therefore emit
byte-identical documents, and parse(emit(m)) reproduces every real exactly.
"""

from __future__ import annotations

import json

from .errors import ModelFormatError, UnsupportedVersionError, ValidationFailedError
from .model import MdpModel, Sap, validate_model

SCHEMA_VERSION = 1


def emit_model(model: MdpModel) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": model.n,
        "gamma": float(model.gamma),
        "saps": [
            {
                "state": sap.state,
                "reward": float(sap.reward),
                "probs": [float(p) for p in sap.probs],
            }
            for sap in model.saps
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_model(text: str) -> MdpModel:
    """Parse and validate a model document.

    Raises ModelFormatError with line/column on syntax errors,
    UnsupportedVersionError on unknown schema versions, and
    ValidationFailedError carrying the violation list when the data breaks
    the model invariants.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("top-level document must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(
            f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    for key in ("n", "gamma", "saps"):
        if key not in doc:
            raise ModelFormatError(f"missing required key {key!r}")
    raw_saps = doc["saps"]
    if not isinstance(raw_saps, list) or not raw_saps:
        raise ModelFormatError("saps must be a non-empty list")
    saps = []
    for i, entry in enumerate(raw_saps):
        if not isinstance(entry, dict):
            raise ModelFormatError(f"sap {i}: must be an object")
        try:
            saps.append(
                Sap(
                    state=int(entry["state"]),
                    reward=float(entry["reward"]),
                    probs=[float(p) for p in entry["probs"]],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"sap {i}: {exc}") from exc
    try:
        model = MdpModel(n=int(doc["n"]), saps=tuple(saps), gamma=float(doc["gamma"]))
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(str(exc)) from exc
    violations = validate_model(model)
    if violations:
        raise ValidationFailedError(violations)
    return model
