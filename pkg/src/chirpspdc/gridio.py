"""Grid files (text and binary) and 8-bit grayscale heatmaps. Layouts are spelled out in README.md."""
from __future__ import annotations

import json
import struct

import numpy as np

from .mathkit import Axis, ComplexGrid2D
from .observables import Spectrum1D

TEXT_MAGIC = "# chirpspdc grid"
BINARY_MAGIC = b"CSPDGRD1"
HEADER = struct.Struct("<8sBBBBII4d12x")  # 64 bytes
FLOAT_FMT = "%.16e"

# observable code -> axis (name, unit) pairs; the binary header only stores the code
AXIS_NAMES = {
    "pmf": (("omega_s", "rad/fs"), ("omega_i", "rad/fs")),
    "joint": (("k_xs", "rad/um"), ("omega_i", "rad/fs")),
    "marginal": (("omega_i", "rad/fs"),),
    "spacetime": (("x_s", "um"), ("t_i", "fs")),
}
OBSERVABLE_CODES = {name: i for i, name in enumerate(AXIS_NAMES)}


class GridFormatError(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot store {type(x).__name__} in grid flags")


def _axes_of(grid):
    if isinstance(grid, Spectrum1D):
        return (grid.axis,)
    return (grid.axis1, grid.axis2)


def format_grid_text(grid) -> str:
    axes = _axes_of(grid)
    values = np.asarray(grid.values)
    cplx = np.iscomplexobj(values)
    lines = [TEXT_MAGIC, f"axes {len(axes)}"]
    for i, ax in enumerate(axes, start=1):
        lines.append(f"axis{i} {ax.name} {ax.unit} {FLOAT_FMT % ax.start} {FLOAT_FMT % ax.stop} {ax.count}")
    lines.append(f"dtype {'complex' if cplx else 'real'}")
    lines.append("order row-major")
    lines.append("flags " + json.dumps(grid.flags, sort_keys=True, default=_jsonable))
    lines.append("data")
    flat = values.reshape(-1)
    if cplx:
        body = [f"{FLOAT_FMT % v.real} {FLOAT_FMT % v.imag}" for v in flat]
    else:
        body = [FLOAT_FMT % v for v in flat.astype(float)]
    return "\n".join(lines + body) + "\n"


def write_grid_text(grid, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_grid_text(grid))


def _expect(line, key, lineno):
    parts = line.split(" ", 1)
    if parts[0] != key or len(parts) != 2:
        raise GridFormatError(f"line {lineno}: expected '{key} ...', got {line!r}")
    return parts[1]


def parse_grid_text(text: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != TEXT_MAGIC:
        raise GridFormatError("not a chirpspdc text grid")
    ndim = int(_expect(lines[1], "axes", 2))
    if ndim not in (1, 2):
        raise GridFormatError(f"unsupported axis count {ndim}")
    axes = []
    for i in range(ndim):
        name, unit, lo, hi, n = _expect(lines[2 + i], f"axis{i + 1}", 3 + i).split()
        axes.append(Axis(name, unit, float(lo), float(hi), int(n)))
    pos = 2 + ndim
    dtype = _expect(lines[pos], "dtype", pos + 1)
    order = _expect(lines[pos + 1], "order", pos + 2)
    if order != "row-major":
        raise GridFormatError(f"unsupported order {order!r}")
    flags = json.loads(_expect(lines[pos + 2], "flags", pos + 3))
    if lines[pos + 3] != "data":
        raise GridFormatError(f"line {pos + 4}: expected 'data'")
    body = lines[pos + 4:]
    shape = tuple(ax.count for ax in axes)
    if len(body) != int(np.prod(shape)):
        raise GridFormatError(f"expected {int(np.prod(shape))} values, found {len(body)}")
    if dtype == "real":
        values = np.array([float(v) for v in body])
    elif dtype == "complex":
        pairs = [v.split() for v in body]
        values = np.array([complex(float(a), float(b)) for a, b in pairs])
    else:
        raise GridFormatError(f"unknown dtype {dtype!r}")
    values = values.reshape(shape)
    if ndim == 1:
        return Spectrum1D(axes[0], values, flags)
    return ComplexGrid2D(axes[0], axes[1], values, flags)


def read_grid_text(path):
    with open(path, encoding="ascii") as fh:
        return parse_grid_text(fh.read())


def format_grid_binary(grid, observable: str) -> bytes:
    axes = _axes_of(grid)
    if observable not in OBSERVABLE_CODES:
        raise ValueError(f"unknown observable {observable!r}")
    if len(axes) != len(AXIS_NAMES[observable]):
        raise ValueError(f"{observable} grids have {len(AXIS_NAMES[observable])} axes")
    values = np.asarray(grid.values)
    cplx = np.iscomplexobj(values)
    a1 = axes[0]
    a2 = axes[1] if len(axes) == 2 else None
    header = HEADER.pack(
        BINARY_MAGIC,
        len(axes),
        1 if cplx else 0,
        OBSERVABLE_CODES[observable],
        0,
        a1.count,
        a2.count if a2 else 0,
        a1.start,
        a1.stop,
        a2.start if a2 else 0.0,
        a2.stop if a2 else 0.0,
    )
    data = values.astype("<c16" if cplx else "<f8").tobytes(order="C")
    return header + data


def write_grid_binary(grid, path, observable: str):
    with open(path, "wb") as fh:
        fh.write(format_grid_binary(grid, observable))


def parse_grid_binary(blob: bytes):
    if len(blob) < HEADER.size:
        raise GridFormatError("file shorter than the 64-byte header")
    magic, ndim, cplx, code, _, n1, n2, lo1, hi1, lo2, hi2 = HEADER.unpack_from(blob)
    if magic != BINARY_MAGIC:
        raise GridFormatError("not a chirpspdc binary grid")
    names = list(AXIS_NAMES)
    if code >= len(names):
        raise GridFormatError(f"unknown observable code {code}")
    labels = AXIS_NAMES[names[code]]
    if ndim != len(labels):
        raise GridFormatError("axis count does not match observable")
    axes = [Axis(*labels[0], lo1, hi1, n1)]
    if ndim == 2:
        axes.append(Axis(*labels[1], lo2, hi2, n2))
    shape = tuple(ax.count for ax in axes)
    dtype = np.dtype("<c16" if cplx else "<f8")
    expected = HEADER.size + int(np.prod(shape)) * dtype.itemsize
    if len(blob) != expected:
        raise GridFormatError(f"expected {expected} bytes, found {len(blob)}")
    values = np.frombuffer(blob, dtype=dtype, offset=HEADER.size).reshape(shape).astype(complex if cplx else float)
    if ndim == 1:
        return Spectrum1D(axes[0], values, {})
    return ComplexGrid2D(axes[0], axes[1], values, {})


def read_grid_binary(path):
    with open(path, "rb") as fh:
        return parse_grid_binary(fh.read())


def heatmap_bytes(grid: ComplexGrid2D) -> bytes:
    """Binary PGM (P5): columns follow axis2 left to right, rows follow axis1 bottom to top.

    Pixel = floor(255 |v| / max|v| + 0.5); an all-zero grid gives a black image.
    """
    mag = np.abs(np.asarray(grid.values))
    top = mag.max()
    if top > 0:
        pix = np.floor(255.0 * mag / top + 0.5).astype(np.uint8)
    else:
        pix = np.zeros(mag.shape, dtype=np.uint8)
    img = pix[::-1, :]
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes(order="C")


def write_heatmap(grid: ComplexGrid2D, path):
    with open(path, "wb") as fh:
        fh.write(heatmap_bytes(grid))
