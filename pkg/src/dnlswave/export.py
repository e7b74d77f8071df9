"""Delimited and JSON output.

CSV numbers are written in fixed 17 significant digit scientific notation so
identical runs give byte-identical files and every float64 round-trips.
JSON documents carry ``schema_version``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .analysis import DecayEstimate
from .errors import DNLSError
from .lattice import Profile, Setting
from .minimizer import MinimizeResult

SCHEMA_VERSION = "1.0"


class MalformedInput(DNLSError, ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.16e}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedInput(f"{path}: empty file")
    return rows[0], np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema_version": SCHEMA_VERSION, **doc}
    path.write_text(json.dumps(body, indent=2, default=_plain) + "\n")
    return path


def read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from None
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise MalformedInput(f"{path}: missing schema_version")
    if str(doc["schema_version"]).split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise MalformedInput(f"{path}: unsupported schema {doc['schema_version']}")
    return doc


# -- profiles ----------------------------------------------------------------------

def profile_rows(p: Profile, margin: int = 4):
    j, u = p.full(margin)
    return zip(j, u)


def write_profile_csv(path, p: Profile, margin: int = 4) -> Path:
    return write_csv(path, ["j", "u"], profile_rows(p, margin))


def profile_document(result: MinimizeResult, potential: str, beta_input: float,
                     extra: dict | None = None) -> dict:
    p = result.profile
    e = result.energy
    doc = {
        "kind": "profile",
        "setting": p.setting.value,
        "n": p.n,
        "potential": potential,
        "beta": result.beta,
        "beta_input": beta_input,
        "values": [float(v) for v in p.values],
        "energy": {"total": e.total, "f_part": e.f_part, "d_part": e.d_part},
        "residual": result.residual,
        "converged": result.converged,
        "strictly_increasing": result.strictly_increasing,
        "steps_taken": result.steps_taken,
        "config": {
            "tau": result.config.tau,
            "max_steps": result.config.max_steps,
            "residual_tol": result.config.residual_tol,
            "enforce_monotone": result.config.enforce_monotone,
            "clamp_to_unit": result.config.clamp_to_unit,
        },
        "energy_trace": decimate(result.energy_trace),
    }
    doc.update(extra or {})
    return doc


def decimate(trace, keep: int = 200) -> list[list[float]]:
    """(step, value) pairs, at most ``keep`` of them plus the last one."""
    n = len(trace)
    stride = max(1, -(-n // keep))
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return [[k, float(trace[k])] for k in idx]


def load_profile(path) -> tuple[Profile, dict]:
    doc = read_json(path)
    if doc.get("kind") != "profile":
        raise MalformedInput(f"{path}: not a profile document")
    try:
        setting = Setting.parse(doc["setting"])
        values = np.array(doc["values"], dtype=float)
        prof = Profile(setting, values)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: bad profile data ({exc})") from None
    if "n" in doc and int(doc["n"]) != prof.n:
        raise MalformedInput(f"{path}: n={doc['n']} but {prof.n} values stored")
    return prof, doc


def write_trace_csv(path, result: MinimizeResult) -> Path:
    rows = ((k, e, r) for k, (e, r) in enumerate(zip(result.energy_trace, result.residual_trace)))
    return write_csv(path, ["step", "energy", "residual"], rows)


# -- analysis ----------------------------------------------------------------------

def tail_rows(p: Profile):
    """(j, w_j, kappa_j) with kappa blank where undefined."""
    j = p.indices
    w = 1.0 - p.values
    for k in range(j.size):
        kap = w[k] / w[k - 1] if k > 0 and w[k - 1] > 0 else None
        yield (j[k], w[k], "" if kap is None else kap)


def decay_document(est: DecayEstimate) -> dict:
    return {
        "kind": "decay",
        "beta": est.beta,
        "f_second_at_1": est.f_second_at_1,
        "delta": est.delta,
        "lambda_exact": est.lambda_exact,
        "kappa_inf": est.kappa_inf,
        "lambda_fit": est.lambda_fit,
        "fit_window": list(est.fit_window) if est.fit_window else None,
        "fit_r2": est.fit_r2,
        "relative_error": (None if est.lambda_fit is None
                           else abs(est.lambda_fit - est.lambda_exact) / est.lambda_exact),
    }
