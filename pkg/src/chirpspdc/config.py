"""Run configuration: a small ``key = value`` format with [sections].

The grammar is documented in README.md. Parsing happens in two passes: the
text becomes a document of raw entries (value + line number), and the
document is validated into a frozen RunConfig. Sweeps reuse the second pass
with one entry overridden.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .crystal import CrystalConfig, solve_central_period
from .dispersion import DispersionDomainError, DispersionModel, load_material
from .observables import VARIABLES, ObservableRequest, Window
from .pump import PumpConfig

OBSERVABLES = ("pmf", "joint", "marginal", "spacetime")
GRID_FORMATS = ("text", "binary")
PMF_HALF_SPAN = 0.75
PMF_COUNT = 256

_BARE = re.compile(r"[A-Za-z_./~][A-Za-z0-9_./~+-]*\Z")
_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Entry:
    value: object
    line: int = 0


@dataclass(frozen=True)
class PmfSettings:
    omega_s: tuple | None = None
    omega_i: tuple | None = None
    collinear: bool = True
    kx_max: float = 0.6
    kx_count: int = 121


@dataclass(frozen=True)
class RunConfig:
    observable: str = "joint"
    pump: PumpConfig = field(default_factory=PumpConfig)
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    period_solved: bool = False
    material_file: str | None = None
    request: ObservableRequest = field(default_factory=ObservableRequest)
    pmf: PmfSettings = field(default_factory=PmfSettings)
    marginal_k_xs: float | None = None
    convergence_check: bool = False
    sweep: tuple | None = None
    output_dir: str = "out"
    emit_heatmap: bool = True
    grid_format: str = "text"

    def material(self) -> DispersionModel:
        return load_material(self.material_file)


# ---------------------------------------------------------------- lexing


def _strip_comment(line):
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def _scalar(tok, lineno):
    tok = tok.strip()
    if not tok:
        raise ConfigError("empty value", lineno)
    if tok.startswith('"'):
        if len(tok) < 2 or not tok.endswith('"') or '"' in tok[1:-1]:
            raise ConfigError(f"malformed string {tok}", lineno)
        return tok[1:-1]
    if tok in ("true", "false"):
        return tok == "true"
    if tok == "none":
        return None
    if _NUMBER.match(tok):
        return float(tok) if any(c in tok for c in ".eE") else int(tok)
    if _BARE.match(tok):
        return tok
    raise ConfigError(f"cannot read value {tok!r}", lineno)


def _value(text, lineno):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError("unterminated list", lineno)
        inner = text[1:-1].strip()
        if not inner:
            return ()
        if "[" in inner or "]" in inner:
            raise ConfigError("nested lists are not supported", lineno)
        return tuple(_scalar(t, lineno) for t in inner.split(","))
    return _scalar(text, lineno)


def parse_document(text: str) -> dict:
    """Text -> {section: {key: Entry}}; top-level keys live in section ''."""
    doc = {"": {}}
    section = ""
    section_lines = {"": 0}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]", line)
            if not m:
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = m.group(1)
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            if section in doc:
                raise ConfigError(f"section [{section}] appears twice", lineno)
            doc[section] = {}
            section_lines[section] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"bad key {key!r}", lineno)
        if key not in SCHEMA[section]:
            where = f"[{section}]" if section else "top level"
            raise ConfigError(f"unknown key {key!r} at {where}", lineno)
        if key in doc[section]:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        doc[section][key] = Entry(_value(val, lineno), lineno)
    doc["_lines"] = section_lines
    return doc


# ---------------------------------------------------------------- typed readers


def _num(v, e, what="a number"):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected {what}, got {v!r}", e.line)
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError("value must be finite", e.line)
    return v


def real(e):
    return _num(e.value, e)


def positive(e):
    v = _num(e.value, e)
    if not v > 0:
        raise ConfigError(f"value must be positive, got {v!r}", e.line)
    return v


def unit_interval(e):
    v = _num(e.value, e)
    if not 0 <= v <= 1:
        raise ConfigError(f"value must lie in [0, 1], got {v!r}", e.line)
    return v


def flag(e):
    if not isinstance(e.value, bool):
        raise ConfigError(f"expected true or false, got {e.value!r}", e.line)
    return e.value


def text(e):
    if not isinstance(e.value, str):
        raise ConfigError(f"expected a string, got {e.value!r}", e.line)
    return e.value


def count(e):
    v = e.value
    if isinstance(v, bool) or not isinstance(v, int) or v < 2:
        raise ConfigError(f"expected an integer count >= 2, got {v!r}", e.line)
    return v


def optional_real(e):
    return None if e.value is None else real(e)


def choice(options):
    def read(e):
        if e.value not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {e.value!r}", e.line)
        return e.value

    return read


def _list(e, n):
    v = e.value
    if not isinstance(v, tuple) or len(v) != n:
        raise ConfigError(f"expected a list of {n} items, got {v!r}", e.line)
    return v


def axis3(e):
    lo, hi, n = _list(e, 3)
    lo = _num(lo, e)
    hi = _num(hi, e)
    if not hi > lo:
        raise ConfigError("axis range must be increasing", e.line)
    return (lo, hi, count(Entry(n, e.line)))


def positive_axis3(e):
    ax = axis3(e)
    if not ax[0] > 0:
        raise ConfigError("frequency axis must be positive", e.line)
    return ax


def range2(e):
    lo, hi = (_num(x, e) for x in _list(e, 2))
    if not hi > lo:
        raise ConfigError("range must be increasing", e.line)
    return (lo, hi)


def counts2(e):
    return tuple(count(Entry(x, e.line)) for x in _list(e, 2))


def window(e):
    v = e.value
    if not isinstance(v, tuple) or len(v) not in (2, 3):
        raise ConfigError("window is [lo, hi] or [lo, hi, inside|outside]", e.line)
    lo, hi = range2(Entry(v[:2], e.line))
    keep = v[2] if len(v) == 3 else "inside"
    if keep not in ("inside", "outside"):
        raise ConfigError(f"window mode must be inside or outside, got {keep!r}", e.line)
    return lo, hi, keep


def sweep_path(e):
    v = text(e)
    if v.count(".") != 1:
        raise ConfigError("sweep parameter is section.key", e.line)
    sec, key = v.split(".")
    if sec not in SCHEMA or sec in ("sweep", "") or key not in SCHEMA[sec]:
        raise ConfigError(f"cannot sweep unknown parameter {v!r}", e.line)
    return v


def sweep_values(e):
    v = e.value
    if not isinstance(v, tuple) or not v:
        raise ConfigError("sweep values must be a non-empty list", e.line)
    for x in v:
        if isinstance(x, float) and not math.isfinite(x):
            raise ConfigError("sweep values must be finite", e.line)
    return v


# section -> key -> (reader, default); None default means "absent"
SCHEMA = {
    "": {
        "observable": (choice(OBSERVABLES), None),
        "material_file": (text, None),
        "output_dir": (text, "out"),
        "emit_heatmap": (flag, True),
        "grid_format": (choice(GRID_FORMATS), "text"),
    },
    "pump": {
        "lambda_um": (positive, 0.8),
        "fwhm_um": (positive, None),
        "sigma_omega": (positive, None),
        "beta_fs2": (real, 0.0),
        "waist_x_um": (positive, 100.0),
        "waist_y_um": (positive, 100.0),
    },
    "crystal": {
        "length_um": (positive, 5000.0),
        "chirp_per_um2": (real, 0.0),
        "r": (unit_interval, 0.5),
        "period_um": (positive, None),
        "temperature_c": (real, 25.0),
        "thermal_expansion": (flag, False),
        "reference_temperature_c": (real, 25.0),
    },
    "grid": {
        "k_xs": (axis3, (-0.45, 0.45, 256)),
        "omega_i": (positive_axis3, None),
        "inner_counts": (counts2, (128, 128)),
        "inner_omega_range": (range2, None),
        "inner_k_range": (range2, None),
        "k_ys": (real, 0.0),
        "convergence_check": (flag, False),
    },
    "pmf": {
        "omega_s": (positive_axis3, None),
        "omega_i": (positive_axis3, None),
        "collinear": (flag, True),
        "kx_max": (positive, 0.6),
        "kx_count": (count, 121),
    },
    "marginal": {
        "k_xs": (optional_real, None),
    },
    "filter": {v: (window, None) for v in VARIABLES},
    "sweep": {
        "parameter": (sweep_path, None),
        "values": (sweep_values, None),
    },
}


def _read(doc, section, key):
    reader, default = SCHEMA[section][key]
    e = doc.get(section, {}).get(key)
    return default if e is None else reader(e)


def _line(doc, section, key=None):
    e = doc.get(section, {}).get(key) if key else None
    return e.line if e is not None else doc.get("_lines", {}).get(section, 0) or None


def build(doc) -> RunConfig:
    """Validate a parsed document into a RunConfig."""
    top = doc.get("", {})
    if "observable" not in top:
        raise ConfigError("missing required key 'observable'")
    observable = _read(doc, "", "observable")
    material_file = _read(doc, "", "material_file")
    try:
        model = load_material(material_file)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load material file: {exc}", _line(doc, "", "material_file")) from exc

    # pump
    fwhm = _read(doc, "pump", "fwhm_um")
    sigma = _read(doc, "pump", "sigma_omega")
    if fwhm is not None and sigma is not None:
        raise ConfigError("give fwhm_um or sigma_omega, not both", _line(doc, "pump", "sigma_omega"))
    if fwhm is None and sigma is None:
        fwhm = 0.001
    pump = PumpConfig(
        lambda_pc=_read(doc, "pump", "lambda_um"),
        fwhm=fwhm,
        beta=_read(doc, "pump", "beta_fs2"),
        Wx=_read(doc, "pump", "waist_x_um"),
        Wy=_read(doc, "pump", "waist_y_um"),
        sigma_omega=sigma,
    )
    try:
        model.check_domain(pump.lambda_pc, 0.5 * sum(model.valid_temperature_range))
    except DispersionDomainError as exc:
        raise ConfigError(str(exc), _line(doc, "pump", "lambda_um")) from exc

    # crystal
    T = _read(doc, "crystal", "temperature_c")
    T_ref = _read(doc, "crystal", "reference_temperature_c")
    for key, t in (("temperature_c", T), ("reference_temperature_c", T_ref)):
        try:
            model.check_domain(pump.lambda_pc, t)
        except DispersionDomainError as exc:
            raise ConfigError(str(exc), _line(doc, "crystal", key)) from exc
    period = _read(doc, "crystal", "period_um")
    solved = period is None
    if solved:
        try:
            period = solve_central_period(pump.lambda_pc, T_ref, model)
        except ValueError as exc:
            raise ConfigError(str(exc), _line(doc, "crystal")) from exc
    fields = dict(
        length_L=_read(doc, "crystal", "length_um"),
        chirp_D=_read(doc, "crystal", "chirp_per_um2"),
        r=_read(doc, "crystal", "r"),
        period_Lambda_c=period,
        temperature_T=T,
        thermal_expansion=_read(doc, "crystal", "thermal_expansion"),
        period_reference_T=T_ref,
    )
    try:
        crystal = CrystalConfig(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc), _line(doc, "crystal", "chirp_per_um2")) from exc

    # grid
    w_range = _read(doc, "grid", "inner_omega_range")
    k_range = _read(doc, "grid", "inner_k_range")
    if (w_range is None) != (k_range is None):
        raise ConfigError("give both inner_omega_range and inner_k_range or neither", _line(doc, "grid"))
    windows = []
    for var in VARIABLES:
        w = _read(doc, "filter", var)
        if w is not None:
            windows.append(Window(var, *w))
    fields = dict(
        k_xs=_read(doc, "grid", "k_xs"),
        omega_i=_read(doc, "grid", "omega_i"),
        inner_counts=_read(doc, "grid", "inner_counts"),
        inner_ranges=None if w_range is None else (w_range, k_range),
        k_ys=_read(doc, "grid", "k_ys"),
        windows=tuple(windows),
    )
    try:
        request = ObservableRequest(**fields)
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in ("k_xs", "omega_i", "inner") if msg.startswith(k)), None)
        key = "inner_counts" if key == "inner" else key
        raise ConfigError(msg, _line(doc, "grid", key)) from exc

    pmf = PmfSettings(
        omega_s=_read(doc, "pmf", "omega_s"),
        omega_i=_read(doc, "pmf", "omega_i"),
        collinear=_read(doc, "pmf", "collinear"),
        kx_max=_read(doc, "pmf", "kx_max"),
        kx_count=_read(doc, "pmf", "kx_count"),
    )

    sweep = None
    if "sweep" in doc:
        path = _read(doc, "sweep", "parameter")
        values = _read(doc, "sweep", "values")
        if path is None or values is None:
            raise ConfigError("[sweep] needs both parameter and values", _line(doc, "sweep"))
        sweep = (path, tuple(values))

    cfg = RunConfig(
        observable=observable,
        pump=pump,
        crystal=crystal,
        period_solved=solved,
        material_file=material_file,
        request=request,
        pmf=pmf,
        marginal_k_xs=_read(doc, "marginal", "k_xs"),
        convergence_check=_read(doc, "grid", "convergence_check"),
        sweep=sweep,
        output_dir=_read(doc, "", "output_dir"),
        emit_heatmap=_read(doc, "", "emit_heatmap"),
        grid_format=_read(doc, "", "grid_format"),
    )
    if sweep is not None:
        # every swept value must build on its own
        for _ in sweep_configs(cfg, doc):
            pass
    return cfg


def parse_config(text: str) -> RunConfig:
    return build(parse_document(text))


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------- output


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        if _BARE.match(v) and v not in ("true", "false", "none"):
            return v
        if '"' in v:
            raise ValueError(f"cannot serialize string containing a quote: {v!r}")
        return f'"{v}"'
    if isinstance(v, tuple):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def to_document(cfg: RunConfig) -> dict:
    """RunConfig -> {section: {key: value}} with every resolved value spelled out."""
    p, c, r, m = cfg.pump, cfg.crystal, cfg.request, cfg.pmf
    doc = {
        "": {
            "observable": cfg.observable,
            "material_file": cfg.material_file,
            "output_dir": cfg.output_dir,
            "emit_heatmap": cfg.emit_heatmap,
            "grid_format": cfg.grid_format,
        },
        "pump": {
            "lambda_um": p.lambda_pc,
            "fwhm_um": p.fwhm,
            "sigma_omega": p.sigma_omega,
            "beta_fs2": p.beta,
            "waist_x_um": p.Wx,
            "waist_y_um": p.Wy,
        },
        "crystal": {
            "length_um": c.length_L,
            "chirp_per_um2": c.chirp_D,
            "r": c.r,
            "period_um": None if cfg.period_solved else c.period_Lambda_c,
            "temperature_c": c.temperature_T,
            "thermal_expansion": c.thermal_expansion,
            "reference_temperature_c": c.period_reference_T,
        },
        "grid": {
            "k_xs": tuple(r.k_xs),
            "omega_i": None if r.omega_i is None else tuple(r.omega_i),
            "inner_counts": tuple(r.inner_counts),
            "inner_omega_range": None if r.inner_ranges is None else tuple(r.inner_ranges[0]),
            "inner_k_range": None if r.inner_ranges is None else tuple(r.inner_ranges[1]),
            "k_ys": r.k_ys,
            "convergence_check": cfg.convergence_check,
        },
        "pmf": {
            "omega_s": m.omega_s,
            "omega_i": m.omega_i,
            "collinear": m.collinear,
            "kx_max": m.kx_max,
            "kx_count": m.kx_count,
        },
        "marginal": {"k_xs": cfg.marginal_k_xs},
        "filter": {w.variable: (w.lo, w.hi, w.keep) for w in r.windows},
    }
    if cfg.sweep is not None:
        doc["sweep"] = {"parameter": cfg.sweep[0], "values": tuple(cfg.sweep[1])}
    return doc


def serialize(cfg: RunConfig) -> str:
    """Canonical text; absent optional values are omitted so parse_config(serialize(cfg)) == cfg."""
    doc = to_document(cfg)
    lines = []
    for section, entries in doc.items():
        body = [f"{k} = {_fmt(v)}" for k, v in entries.items() if v is not None]
        if section and not body:
            continue
        if section:
            lines.append("")
            lines.append(f"[{section}]")
        lines.extend(body)
    return "\n".join(lines).lstrip("\n") + "\n"


def resolved_dict(cfg: RunConfig) -> dict:
    """Plain nested dict of the resolved configuration for the run manifest."""
    doc = to_document(cfg)
    out = {}
    for section, entries in doc.items():
        vals = {k: (list(v) if isinstance(v, tuple) else v) for k, v in entries.items()}
        if section == "":
            out.update(vals)
        else:
            out[section] = vals
    out["crystal"]["period_um"] = cfg.crystal.period_Lambda_c
    out["crystal"]["period_solved"] = cfg.period_solved
    out["pump"]["sigma_rad_per_fs"] = cfg.pump.sigma
    out["pump"]["omega_pc_rad_per_fs"] = cfg.pump.omega_pc
    out["crystal"]["xi"] = cfg.crystal.chirp_D * cfg.crystal.length_L**2
    return out


def _sweep_label(path, value, index):
    key = path.split(".")[1]
    return f"{index:02d}_{key}={_fmt(value)}"


def sweep_configs(cfg: RunConfig, doc: dict | None = None):
    """Yield (label, RunConfig) for each swept value, with the sweep section removed."""
    if cfg.sweep is None:
        raise ValueError("configuration has no [sweep] section")
    path, values = cfg.sweep
    section, key = path.split(".")
    line = 0
    if doc is not None and "sweep" in doc and "values" in doc["sweep"]:
        line = doc["sweep"]["values"].line
    base = to_document(cfg)
    base.pop("sweep")
    for i, v in enumerate(values):
        raw = {s: {k: Entry(x, line) for k, x in entries.items() if x is not None} for s, entries in base.items()}
        raw.setdefault(section, {})[key] = Entry(v, line)
        if section == "pump" and key in ("fwhm_um", "sigma_omega"):
            raw["pump"].pop("sigma_omega" if key == "fwhm_um" else "fwhm_um", None)
        if section == "crystal" and key == "period_um" and v is None:
            raw["crystal"].pop("period_um")
        sub = build(raw)
        yield _sweep_label(path, v, i), replace(sub, output_dir=cfg.output_dir)


def default_pmf_axes(cfg: RunConfig):
    wd = 0.5 * cfg.pump.omega_pc
    default = (wd - PMF_HALF_SPAN, wd + PMF_HALF_SPAN, PMF_COUNT)
    return cfg.pmf.omega_s or default, cfg.pmf.omega_i or default


def kx_scan(cfg: RunConfig):
    return np.linspace(0.0, cfg.pmf.kx_max, cfg.pmf.kx_count)
