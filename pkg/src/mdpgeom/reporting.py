"""Machine-readable result emission: JSON reports and span-trace CSVs.

Everything written here is a pure function of its inputs (no timestamps,
no environment probes), so reruns with the same seed and flags are
byte-identical. Reals are printed with Python's shortest round-trip repr,
which preserves them to 17 significant digits.

greedy_policy_hash is 64-bit FNV-1a (offset 14695981039346656037, prime
1099511628211) over the policy's SAP-index vector, each index fed as 8
little-endian bytes; it is printed as 16 hex digits so external tools can
recompute it.
"""

from __future__ import annotations

import dataclasses
import math

from .convergence import ConvergenceReport

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK
    return h


def policy_hash(choice) -> str:
    """16-hex-digit FNV-1a over the SAP-index vector (8 LE bytes per index)."""
    payload = b"".join(int(i).to_bytes(8, "little") for i in choice)
    return f"{fnv1a64(payload):016x}"


def _json_safe(value):
    """Recursively convert to JSON-encodable data; non-finite reals to strings."""
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _json_safe(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (frozenset, set)):
        return sorted(_json_safe(v) for v in value)
    if hasattr(value, "item"):  # numpy scalars
        return _json_safe(value.item())
    if hasattr(value, "tolist"):  # numpy arrays
        return _json_safe(value.tolist())
    raise TypeError(f"cannot serialize {type(value)!r}")


def report_dict(report: ConvergenceReport, provenance: dict | None = None) -> dict:
    doc = {
        "report_version": 1,
        "gamma": report.gamma,
        "v0": list(report.v0),
        "diagnostics": report.diagnostics,
        "pi_star": list(report.pi_star) if report.pi_star is not None else None,
        "exponent": report.exponent,
        "constants": report.constants,
        "bound_satisfied": report.bound_satisfied,
        "sanity_bound_satisfied": report.sanity_bound_satisfied,
        "converged_early": report.converged_early,
        "span_trace": report.span_trace,
        "per_step_ratios": report.per_step_ratios,
        "greedy_policy_hashes": [policy_hash(g) for g in report.greedy_policies],
        "unnormalized_span_trace": report.unnormalized_span_trace,
        "provenance": provenance or {},
    }
    return _json_safe(doc)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_csv(report: ConvergenceReport) -> str:
    """CSV of the verified run: columns t, span, ratio, greedy_policy_hash.

    Row t's ratio is span(v_t) / span(v_{t-1}); the t = 0 ratio is empty.
    """
    lines = ["t,span,ratio,greedy_policy_hash"]
    for t, s in enumerate(report.span_trace):
        ratio = report.per_step_ratios[t - 1] if t >= 1 else None
        lines.append(
            f"{t},{_fmt(float(s))},{_fmt(ratio)},{policy_hash(report.greedy_policies[t])}"
        )
    return "\n".join(lines) + "\n"
