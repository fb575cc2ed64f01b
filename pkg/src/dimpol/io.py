"""Config parsing and CSV persistence.

Policy files are UTF-8 CSV.  Metadata comes first as ``# key=value`` lines,
followed by a header row ``i0,...,u0,...`` and one row per grid node in
row-major order (axis 0 outermost).  Floats are written with 17 significant
digits so a write/read round trip is lossless.
"""

from __future__ import annotations

import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .grid import Axis
from .policy import DimensionlessPolicy, TabularPolicy

FORMAT_TAG = "dimpol-policy"

_TUPLE_FLOAT_KEYS = ("context", "c_star", "source_context", "transferred_from")
_TUPLE_STR_KEYS = ("context_names", "c_star_names", "state_names", "input_names")
_BOOL_KEYS = ("dimensionless", "approximate")
_FLOAT_KEYS = ("control_resolution",)


def fmt(x: float) -> str:
    """Shortest text that parses back to the same double (at most 17 digits)."""
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- policy files

def policy_to_text(policy: TabularPolicy) -> str:
    meta = dict(policy.meta)
    lines = [f"format={FORMAT_TAG}", f"version={__version__}"]
    ordered = ["system", "signature", "dimensionless", "context_names", "context",
               "c_star_names", "c_star", "state_names", "input_names",
               "control_resolution", "approximate", "source_context", "transferred_from"]
    meta["dimensionless"] = policy.dimensionless
    if policy.dimensionless:
        meta["c_star"] = tuple(policy.c_star)
    for key in ordered + sorted(k for k in meta if k not in ordered):
        if key not in meta or meta[key] is None:
            continue
        lines.append(f"{key}={_encode(key, meta[key])}")
        if key == "c_star":
            for name, v in zip(meta.get("c_star_names", ()), meta["c_star"]):
                lines.append(f"{name}_star={fmt(v)}")
    for i, ax in enumerate(policy.axes):
        lines.append(f"axis{i}={fmt(ax.lo)},{fmt(ax.hi)},{ax.count}")
    lines.append(f"interp={policy.interp}")
    lines.append(f"oob={policy.oob}")

    out = io.StringIO()
    for line in lines:
        out.write(f"# {line}\n")
    n, k = policy.n, policy.k
    out.write(",".join([f"i{j}" for j in range(n)] + [f"u{j}" for j in range(k)]) + "\n")
    idx = np.indices(policy.shape).reshape(n, -1).T
    vals = policy.flat_values()
    for row_idx, row_val in zip(idx, vals):
        out.write(",".join([str(int(v)) for v in row_idx] + ["%.17g" % v for v in row_val]))
        out.write("\n")
    return out.getvalue()


def _encode(key, value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(fmt(v) if isinstance(v, (int, float)) else str(v) for v in value)
    if isinstance(value, float):
        return fmt(value)
    return str(value)


def _decode(key, text: str):
    if key in _BOOL_KEYS:
        return text.strip().lower() == "true"
    if key in _TUPLE_FLOAT_KEYS:
        return tuple(float(v) for v in text.split(",")) if text else ()
    if key in _TUPLE_STR_KEYS:
        return tuple(v.strip() for v in text.split(",")) if text else ()
    if key in _FLOAT_KEYS:
        return float(text)
    return text


def write_policy(path, policy: TabularPolicy):
    atomic_write_text(path, policy_to_text(policy))


class PolicyFileError(ValueError):
    pass


def read_policy(path) -> TabularPolicy:
    header: dict[str, str] = {}
    body_start = 0
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].strip().partition("=")
        if not sep:
            continue
        header[key.strip()] = value.strip()
    if header.get("format") != FORMAT_TAG:
        raise PolicyFileError(f"{path}: not a policy file (missing format={FORMAT_TAG})")
    axes = []
    i = 0
    while f"axis{i}" in header:
        lo, hi, count = header[f"axis{i}"].split(",")
        axes.append(Axis(float(lo), float(hi), int(count)))
        i += 1
    if not axes:
        raise PolicyFileError(f"{path}: no grid axes in header")
    cols = lines[body_start].split(",")
    n = sum(1 for c in cols if c.startswith("i"))
    k = sum(1 for c in cols if c.startswith("u"))
    if n != len(axes) or k < 1:
        raise PolicyFileError(f"{path}: column header {cols} does not match {len(axes)} axes")
    shape = tuple(a.count for a in axes)
    rows = lines[body_start + 1:]
    if len(rows) != int(np.prod(shape)):
        raise PolicyFileError(f"{path}: expected {int(np.prod(shape))} rows, found {len(rows)}")
    data = np.array([r.split(",") for r in rows], dtype=float)
    idx = data[:, :n].astype(np.int64)
    values = np.empty(shape + (k,))
    values[tuple(idx.T)] = data[:, n:]

    skip = {"format", "version", "interp", "oob"} | {f"axis{j}" for j in range(n)}
    star_keys = {f"{name}_star" for name in _decode("c_star_names", header.get("c_star_names", ""))}
    meta = {key: _decode(key, v) for key, v in header.items()
            if key not in skip and key not in star_keys}
    kwargs = dict(axes=tuple(axes), values=values, interp=header.get("interp", "multilinear"),
                  oob=header.get("oob", "clamp"), meta=meta)
    if meta.get("dimensionless"):
        return DimensionlessPolicy(c_star=tuple(meta.get("c_star", ())), **kwargs)
    return TabularPolicy(**kwargs)


def field_to_text(shape, values, column: str) -> str:
    out = io.StringIO()
    n = len(shape)
    out.write(",".join([f"i{j}" for j in range(n)] + [column]) + "\n")
    idx = np.indices(shape).reshape(n, -1).T
    for row_idx, v in zip(idx, np.asarray(values).ravel()):
        out.write(",".join([str(int(i)) for i in row_idx] + ["%.17g" % v]) + "\n")
    return out.getvalue()


def residuals_to_text(residuals) -> str:
    lines = ["iteration,max_abs_delta"]
    lines += [f"{i + 1},{'%.17g' % r}" for i, r in enumerate(residuals)]
    return "\n".join(lines) + "\n"


def rows_to_csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join("%.17g" % v if isinstance(v, float) else str(v) for v in row) + "\n")
    return out.getvalue()


# --------------------------------------------------------------------- configs

class ConfigError(ValueError):
    pass


CONTEXT_KEYS = {
    "pendulum": ("m", "g", "l", "mgl", "omega", "q", "tau_max"),
    "car": ("g", "l", "x_c", "y_c", "q"),
}


@dataclass
class RunConfig:
    system: str
    context: dict[str, float]
    grid: tuple[int, ...] = (251, 251)
    controls: int = 51
    dt: float | None = None
    horizon: float | None = None
    oob_cost: float | None = None
    interp: str = "multilinear"
    out: str | None = None
    extra: dict[str, str] = field(default_factory=dict)

    def model(self):
        from .systems import make_model
        return make_model(self.system, self.context)

    def dp_config(self):
        model = self.model()
        horizon = self.horizon
        periods = self.extra.get("periods")
        if horizon is None and periods is not None:
            if self.system != "pendulum":
                raise ConfigError("'periods' is only defined for the pendulum")
            horizon = float(periods) * 2 * math.pi / model.ctx.omega
        return model.dp_config(grid=self.grid, controls=self.controls, dt=self.dt,
                               horizon=horizon, oob_cost=self.oob_cost)


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def _positive(key, text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"{key} must be positive, got {text}")
    return v


def _count(key, text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {text!r}") from None
    if v < 2:
        raise ConfigError(f"{key}: grid count must be ≥ 2" if key == "grid"
                          else f"{key} must be ≥ 2")
    return v


def config_from_mapping(kv: dict[str, str]) -> RunConfig:
    kv = dict(kv)
    system = kv.pop("system", None)
    if system not in CONTEXT_KEYS:
        raise ConfigError(f"system must be one of {sorted(CONTEXT_KEYS)}, got {system!r}")
    context = {}
    for key in CONTEXT_KEYS[system]:
        if key in kv:
            context[key] = _positive(key, kv.pop(key))
    if system == "pendulum":
        full = {"q", "tau_max"} <= context.keys() and (
            {"m", "g", "l"} <= context.keys() or {"mgl", "omega"} <= context.keys())
    else:
        full = set(CONTEXT_KEYS["car"]) <= context.keys()
    if not full:
        raise ConfigError(f"incomplete {system} context: {sorted(context)}")
    cfg = RunConfig(system=system, context=context)
    if "grid" in kv:
        counts = tuple(_count("grid", v.strip()) for v in kv.pop("grid").split(","))
        cfg.grid = counts * 2 if len(counts) == 1 else counts
        if len(cfg.grid) != 2:
            raise ConfigError("grid must give one count or one per state axis")
    if "controls" in kv:
        cfg.controls = _count("controls", kv.pop("controls"))
    for key in ("dt", "horizon", "oob_cost"):
        if key in kv:
            setattr(cfg, key, _positive(key, kv.pop(key)))
    if "periods" in kv:
        _positive("periods", kv["periods"])
    if "interp" in kv:
        cfg.interp = kv.pop("interp")
        if cfg.interp not in ("nearest", "multilinear"):
            raise ConfigError(f"interp must be nearest or multilinear, got {cfg.interp!r}")
    cfg.out = kv.pop("out", None)
    cfg.extra = kv
    return cfg


def read_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_kv(text))
