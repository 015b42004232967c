"""JSON model and network documents, and deterministic report encoding."""

from __future__ import annotations

import json
import math
from dataclasses import fields, is_dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DimensionError, ValidationError
from .interconnect import ClosedLoopNetwork, SubsystemSpec, assemble, selection_matrix
from .model import OscillatorModel, canonical_theta

SCHEMA_VERSION = "1.0"
SIGNIFICANT_DIGITS = 12


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise ValidationError(f"{where}: missing field {key!r}")
    return doc[key]


def _int_field(doc: Mapping[str, Any], key: str, where: str) -> int:
    val = _require(doc, key, where)
    if isinstance(val, bool) or not isinstance(val, int) or val <= 0:
        raise ValidationError(f"{where}: {key!r} must be a positive integer")
    return val


def _matrix(val: Any, shape: tuple[int, int], name: str) -> np.ndarray:
    try:
        arr = np.array(val, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not a numeric matrix") from exc
    if arr.size == 0 and shape[0] * shape[1] == 0:
        return np.zeros(shape)
    if arr.shape != shape:
        raise DimensionError(f"{name} must be {shape[0]}x{shape[1]}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def _theta(val: Any, n: int, name: str) -> np.ndarray:
    if isinstance(val, str):
        if val != "canonical":
            raise ValidationError(f"{name} must be 'canonical' or an array")
        if n % 2:
            raise DimensionError(f"canonical {name} needs even n, got {n}")
        return canonical_theta(n)
    return _matrix(val, (n, n), name)


def model_from_dict(doc: Mapping[str, Any]) -> OscillatorModel:
    if not isinstance(doc, Mapping):
        raise ValidationError("model document must be a JSON object")
    n = _int_field(doc, "n", "model")
    m = _int_field(doc, "m", "model")
    theta = _theta(_require(doc, "theta", "model"), n, "theta")
    R = _matrix(_require(doc, "R", "model"), (n, n), "R")
    has_m, has_c = "M" in doc, "coupling" in doc
    if has_m == has_c:
        raise ValidationError("model needs exactly one of 'M' or 'coupling'")
    if has_m:
        return OscillatorModel(theta, R, _matrix(doc["M"], (m, n), "M"))
    coupling = doc["coupling"]
    if not isinstance(coupling, Mapping):
        raise ValidationError("'coupling' must be an object")
    shape = _matrix(_require(coupling, "shape", "coupling"), (m, n), "shape")
    eps = _require(coupling, "epsilon", "coupling")
    if isinstance(eps, bool) or not isinstance(eps, (int, float)):
        raise ValidationError("coupling epsilon must be a number")
    return OscillatorModel.from_coupling(theta, R, shape, float(eps))


def model_to_dict(model: OscillatorModel) -> dict[str, Any]:
    out: dict[str, Any] = {"n": model.n, "m": model.m, "theta": model.Theta.tolist(), "R": model.R.tolist()}
    if model.shape is None:
        out["M"] = model.M.tolist()
    else:
        out["coupling"] = {"shape": model.shape.tolist(), "epsilon": model.coupling_strength}
    return out


def _subsystem(doc: Mapping[str, Any], where: str, partner_p: int) -> SubsystemSpec:
    n = _int_field(doc, "n", where)
    m = _int_field(doc, "m", where)
    p = _int_field(doc, "p", where)
    theta = _theta(_require(doc, "theta", where), n, f"{where}.theta")
    R = _matrix(_require(doc, "R", where), (n, n), f"{where}.R")
    M = _matrix(_require(doc, "Mshape", where), (m, n), f"{where}.Mshape")
    L = _matrix(_require(doc, "Lshape", where), (partner_p, n), f"{where}.Lshape")
    sel = _require(doc, "D", where)
    if not isinstance(sel, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in sel):
        raise ValidationError(f"{where}.D must be a list of 1-based row indices")
    if len(sel) != p:
        raise DimensionError(f"{where}.D selects {len(sel)} rows but p = {p}")
    return SubsystemSpec(theta, R, M, L, selection_matrix(sel, m))


def network_from_dict(doc: Mapping[str, Any]) -> ClosedLoopNetwork:
    if not isinstance(doc, Mapping):
        raise ValidationError("network document must be a JSON object")
    subs = _require(doc, "subsystems", "network")
    if not isinstance(subs, list) or len(subs) != 2 or not all(isinstance(s, Mapping) for s in subs):
        raise ValidationError("'subsystems' must hold exactly two objects")
    p = [_int_field(s, "p", f"subsystems[{i}]") for i, s in enumerate(subs)]
    s1 = _subsystem(subs[0], "subsystems[0]", p[1])
    s2 = _subsystem(subs[1], "subsystems[1]", p[0])
    R12 = _matrix(_require(doc, "R12", "network"), (s1.n, s2.n), "R12")
    eps = _require(doc, "epsilon", "network")
    if isinstance(eps, bool) or not isinstance(eps, (int, float)):
        raise ValidationError("network epsilon must be a number")
    return assemble(s1, s2, R12, float(eps))


def round_sig(x: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def to_jsonable(obj: Any) -> Any:
    """Numbers rounded to 12 significant digits; complex as ``{re, im}``; non-finite as strings."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        r = round_sig(x)
        return 0.0 if r == 0.0 else r
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"
