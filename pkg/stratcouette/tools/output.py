"""
Shared plumbing for the command-line tools.

- ToolSpec: name, description and input schema of one tool
- CSV writer: config header comment, 17 significant digits, '\\n' line endings
- JSON writer: {config, results, checks}
- check records and result dicts
"""

import json
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from stratcouette.backend.errors import StratCouetteError
from stratcouette.backend.settings import RunConfig

logger = logging.getLogger(__name__)


class ToolSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    inputSchema: dict


def config_schema(*keys: str) -> dict:
    """JSON schema of the RunConfig keys a tool reads."""
    properties = {}
    for key in keys:
        field = RunConfig.model_fields[key]
        annotation = field.annotation
        if annotation is bool:
            kind = "boolean"
        elif annotation is int:
            kind = "integer"
        elif annotation in (float, float | None):
            kind = "number"
        elif annotation in (tuple[float, ...], tuple[str, ...]):
            kind = "array"
        else:
            kind = "string"
        default = field.default
        properties[key] = {"type": kind, "default": list(default) if isinstance(default, tuple) else default}
    return {"type": "object", "properties": properties, "required": []}


COMMON_KEYS = ("beta", "m", "data_kind", "omega_amplitude", "rho_amplitude", "data_center", "data_width",
               "y_min", "y_max", "n_points", "output", "output_dir", "output_format")
QUADRATURE_KEYS = ("eta_max", "xi_max", "delta0", "panels_per_decade", "jacobi_order", "filon_order",
                   "panel_width", "legendre_order", "table_spacing", "tolerance", "check_refinement")


# -------------------------------------------------
# Number formatting
# -------------------------------------------------

def fmt(x: float) -> str:
    """17 significant digits, '.' decimal separator."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def _json_value(v):
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        # shortest round-trip repr; non-finite values as strings
        return float(v) if math.isfinite(v) else fmt(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_json_value(v.real), _json_value(v.imag)]
    if isinstance(v, np.ndarray):
        return _json_value(v.tolist())
    return v


# -------------------------------------------------
# Writers
# -------------------------------------------------

def write_csv(path: Path, config: RunConfig, columns: dict[str, np.ndarray],
              meta: dict | None = None) -> Path:
    """
    Complex columns are split into <name>_re, <name>_im. The header holds the
    resolved config and any extra metadata as '# key = value' lines.
    """
    names, data = [], []
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            names += [f"{name}_re", f"{name}_im"]
            data += [arr.real, arr.imag]
        else:
            names.append(name)
            data.append(arr.astype(float))
    lengths = {len(d) for d in data}
    if len(lengths) > 1:
        raise StratCouetteError("CSV columns differ in length", {"columns": names})

    lines = [f"# {key} = {value}" for key, value in config.resolved_items()]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {fmt(value) if isinstance(value, float) else value}")
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(fmt(v) for v in row))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    logger.info("wrote %s (%d rows)", path, len(data[0]) if data else 0)
    return path


def write_json(path: Path, config: RunConfig, results, checks: list[dict]) -> Path:
    payload = {
        "config": dict(config.resolved_items()),
        "results": _json_value(results),
        "checks": _json_value(checks),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    logger.info("wrote %s", path)
    return path


def write_report(config: RunConfig, suffix: str, results, checks: list[dict]) -> Path:
    """Report in the configured format; CSV reports list one check per row."""
    if config.output_format == "json":
        return write_json(config.output_path(f"{suffix}.json"), config, results, checks)
    columns = {
        "check": np.arange(len(checks), dtype=float),
        "passed": np.array([1.0 if c["status"] == "pass" else 0.0 for c in checks]),
        "value": np.array([c["value"] for c in checks], dtype=float),
        "tolerance": np.array([c["tolerance"] for c in checks], dtype=float),
    }
    meta = {f"check_{i}": c["name"] for i, c in enumerate(checks)}
    return write_csv(config.output_path(f"{suffix}.csv"), config, columns, meta)


# -------------------------------------------------
# Checks and statuses
# -------------------------------------------------

def make_check(name: str, passed: bool, value: float, tolerance: float) -> dict:
    return {"name": name, "status": "pass" if passed else "fail", "value": float(value), "tolerance": float(tolerance)}


def finish(operation: str, files: list[Path], checks: list[dict], **extra) -> dict:
    failed = [c["name"] for c in checks if c["status"] != "pass"]
    result = {
        "status": "fail" if failed else "ok",
        "operation": operation,
        "files": [str(f) for f in files],
        "checks": len(checks),
        "failed": failed,
    }
    result.update(extra)
    return result


def error_result(operation: str, error: Exception) -> dict:
    result = {"status": "error", "operation": operation, "message": str(error)}
    if isinstance(error, StratCouetteError):
        result.update(error.to_dict())
        result["exit_code"] = error.exit_code
    return result
