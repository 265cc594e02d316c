"""JSON reports: floats with 17 significant digits, complex numbers as
[re, im], integers exact.  Output is deterministic for identical input."""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .connectivity import CheckResult, ConnectivityWitness, ItineraryRecord
from .orbits import RadiiModel
from .raster import ComponentRecord, Window
from .roots import CriticalSet

__all__ = [
    "SCHEMA_VERSION",
    "dumps",
    "loads",
    "as_complex",
    "radii_dict",
    "critical_dict",
    "record_dict",
    "itinerary_dict",
    "witness_dict",
    "check_dict",
    "window_dict",
]

SCHEMA_VERSION = 1
TIMESTAMP_KEY = "generated_at"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _emit(obj: Any, out: list, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        out.append(f"[{_float(z.real)}, {_float(z.imag)}]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            out.append(("," if i else "") + pad + json.dumps(str(k)) + ": ")
            _emit(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        flat = all(isinstance(v, (int, float, bool, np.number)) or v is None for v in seq)
        if flat:
            out.append("[")
            for i, v in enumerate(seq):
                out.append(", " if i else "")
                _emit(v, out, indent, level + 1)
            out.append("]")
            return
        out.append("[")
        for i, v in enumerate(seq):
            out.append(("," if i else "") + pad)
            _emit(v, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 1) -> str:
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)


def as_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


# ---------------------------------------------------------------------------

def window_dict(w: Window) -> dict:
    return {"center": complex(w.center), "width": float(w.width), "height": float(w.height)}


def radii_dict(r: RadiiModel) -> dict:
    return {"K_esc": r.K_esc, "r_trap": r.r_trap, "r_inner": r.r_inner, "r_outer": r.r_outer,
            "r_mid": r.r_mid, "K1": r.K1}


def critical_dict(c: CriticalSet, lam: complex) -> dict:
    out = {
        "nu_lambda": complex(c.nu_lambda),
        "nu_zero": complex(c.nu_zero),
        "w_lambda": complex(c.w_lambda),
        "free_ring": [complex(z) for z in c.free_ring],
        "ring_zeros": [complex(z) for z in c.ring_zeros],
        "infinity_side": [complex(z) for z in c.infinity_side],
    }
    if lam != 0:
        out["pairing_residual_critical"] = c.pairing_residual(lam, "critical")
        out["pairing_residual_zeros"] = c.pairing_residual(lam, "zeros")
    return out


def record_dict(r: ComponentRecord) -> dict:
    return {
        "id": r.id,
        "grid": r.grid,
        "label": r.label_id,
        "role": r.role,
        "pixels": r.pixel_count,
        "connectivity": r.connectivity,
        "twin_connectivity": r.twin_connectivity,
        "resolved": r.resolved,
        "surrounds_origin": r.surrounds_origin,
        "contains_origin": r.contains_origin,
        "touches_frame": r.touches_frame,
        "zone": r.zone,
        "forward_target": r.forward_target,
        "representative": complex(r.representative),
        "note": r.note,
    }


def itinerary_dict(it: ItineraryRecord) -> dict:
    return {"k": it.k, "steps": list(it.steps), "terminal": it.terminal,
            "u_nu_surrounds": it.u_nu_surrounds, "orbit": [complex(z) for z in it.orbit]}


def witness_dict(w: ConnectivityWitness) -> dict:
    return {"i": w.i, "j": w.j, "l": w.l, "kappa": w.kappa, "status": w.status}


def check_dict(c: CheckResult) -> dict:
    return {"name": c.name, "passed": c.passed, "checked": c.checked, "details": list(c.details)}
