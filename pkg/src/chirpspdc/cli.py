"""Command-line driver: ``spdc run|sweep|validate <config>``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
from dataclasses import replace

import numba
import numpy as np
import scipy

from . import __version__
from .biphoton import JafContext, pmf_map
from .config import ConfigError, RunConfig, default_pmf_axes, kx_scan, load_config, resolved_dict, serialize, sweep_configs
from .dispersion import DispersionDomainError
from .gridio import write_grid_binary, write_grid_text, write_heatmap
from .mathkit import Axis, ComplexGrid2D
from .observables import (
    RangeTooSmallError,
    extract_widths,
    joint_spectrum,
    marginal_spectrum,
    spacetime_map,
)

log = logging.getLogger("chirpspdc")

CONVERGENCE_LEVEL = 1e-3
MANIFEST_FORMAT = "chirpspdc-run/1"


def context(cfg: RunConfig) -> JafContext:
    return JafContext(pump=cfg.pump, crystal=cfg.crystal, dispersion=cfg.material())


def _convergence(cfg, ctx, joint, threads):
    """Re-run the joint spectrum with doubled inner counts over the same inner box."""
    (dw, dk) = joint.flags["inner_ranges"]
    n1, n2 = joint.flags["inner_counts"]
    req = replace(cfg.request, inner_ranges=(tuple(dw), tuple(dk)), inner_counts=(2 * n1, 2 * n2))
    fine = joint_spectrum(req, ctx, threads=threads)
    a, b = np.asarray(joint.values), np.asarray(fine.values)
    sig = b >= 1e-2 * b.max()
    change = float(np.max(np.abs(a - b)[sig] / b[sig]))
    return {"checked": True, "max_relative_change": change, "converged": change < CONVERGENCE_LEVEL}


def compute(cfg: RunConfig, threads: int = 1):
    """Evaluate the configured observable; returns (grid, manifest extras)."""
    ctx = context(cfg)
    extra = {"convergence": {"checked": False}}
    if cfg.observable == "pmf":
        ws, wi = default_pmf_axes(cfg)
        grid = pmf_map(Axis("omega_s", "rad/fs", *ws), Axis("omega_i", "rad/fs", *wi), ctx, cfg.pmf.collinear, kx_scan(cfg))
        return grid, extra
    joint = joint_spectrum(cfg.request, ctx, threads=threads)
    if cfg.convergence_check:
        extra["convergence"] = _convergence(cfg, ctx, joint, threads)
    extra["joint_flags"] = dict(joint.flags)
    if cfg.observable == "joint":
        return joint, extra
    if cfg.observable == "marginal":
        spectrum = marginal_spectrum(joint, cfg.marginal_k_xs)
        return spectrum, extra
    fj = spacetime_map(joint)
    try:
        dx, dt = extract_widths(fj.magnitude())
        extra["widths"] = {"delta_x_um": dx, "delta_t_fs": dt}
    except RangeTooSmallError as exc:
        extra["widths"] = {"error": str(exc)}
    return fj, extra


def versions():
    return {
        "chirpspdc": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
    }


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


def run(cfg: RunConfig, output_dir=None, threads: int = 1, heatmap=None) -> dict:
    """Compute and write manifest.json, the grid file and optionally heatmap.pgm."""
    out = output_dir or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    grid, extra = compute(cfg, threads)
    binary = cfg.grid_format == "binary"
    grid_name = "grid.bin" if binary else "grid.txt"
    if binary:
        write_grid_binary(grid, os.path.join(out, grid_name), cfg.observable)
    else:
        write_grid_text(grid, os.path.join(out, grid_name))
    emit = cfg.emit_heatmap if heatmap is None else heatmap
    heat_name = None
    if emit and isinstance(grid, ComplexGrid2D):
        heat_name = "heatmap.pgm"
        write_heatmap(grid, os.path.join(out, heat_name))
    flags = dict(grid.flags)
    warnings = []
    jf = extra.get("joint_flags", flags)
    if jf.get("clipped"):
        warnings.append(f"inner integration range clips the integrand (edge/max = {jf['clip_ratio']:.3g})")
    conv = extra["convergence"]
    if conv.get("checked") and not conv["converged"]:
        warnings.append(f"inner-grid doubling changed J by {conv['max_relative_change']:.3g}")
    manifest = {
        "format": MANIFEST_FORMAT,
        "observable": cfg.observable,
        "config": resolved_dict(cfg),
        "versions": versions(),
        "outputs": {"grid": grid_name, "heatmap": heat_name},
        "flags": flags,
        "warnings": warnings,
        **extra,
    }
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2, default=_plain) + "\n")
    return manifest


def sweep(cfg: RunConfig, output_dir=None, threads: int = 1, heatmap=None) -> list:
    out = output_dir or cfg.output_dir
    labels = []
    for label, sub in sweep_configs(cfg):
        log.info("sweep point %s", label)
        run(sub, os.path.join(out, label), threads, heatmap)
        labels.append(label)
    index = {"parameter": cfg.sweep[0], "values": list(cfg.sweep[1]), "runs": labels}
    with open(os.path.join(out, "sweep.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(index, sort_keys=True, indent=2) + "\n")
    return labels


def build_parser():
    p = argparse.ArgumentParser(prog="spdc", description="Biphoton spectra from chirped QPM crystals.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "evaluate one configuration"),
        ("sweep", "evaluate every value of the [sweep] section"),
        ("validate", "parse and print the resolved configuration"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        if name != "validate":
            sp.add_argument("--output-dir", default=None, help="overrides output_dir from the config")
            sp.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
            sp.add_argument("--no-heatmap", action="store_true", help="skip heatmap.pgm")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    if args.command == "validate":
        sys.stdout.write(serialize(cfg))
        return 0
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    heatmap = False if args.no_heatmap else None
    try:
        if args.command == "run":
            if cfg.sweep is not None:
                print(f"{args.config}: defines a [sweep]; use 'spdc sweep'", file=sys.stderr)
                return 2
            run(cfg, args.output_dir, args.threads, heatmap)
        else:
            if cfg.sweep is None:
                print(f"{args.config}: no [sweep] section", file=sys.stderr)
                return 2
            sweep(cfg, args.output_dir, args.threads, heatmap)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1
    except (DispersionDomainError, RangeTooSmallError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
