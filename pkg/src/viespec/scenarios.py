"""Scenario files and the end-to-end pipeline.

A scenario is a TOML file::

    id = "cube-homogeneous-lowfreq"
    description = "..."

    [background]          # relative to vacuum; conductivity in S/m or in units of omega*eps0
    eps_r = 1.0
    mu_r = 1.0
    sigma = 0.0           # or sigma_rel = sigma/(omega*eps0)

    [frequency]
    hz = 1e9

    [grid]
    dims = [4, 4, 4]
    h_wavelengths = 0.0125  # or h = <metres>; the wavelength is the background one

    [[box]]               # lo/hi in cell units, lo <= index < hi
    lo = [0, 0, 0]
    hi = [4, 4, 4]
    eps_r = 1.5           # scalar, 3-vector (diagonal) or 3x3
    sigma_rel = 0.25      # or sigma = <S/m>

    [run]
    mode = "dense"        # or "arnoldi"
    arnoldi_k = 8
    sphere_resolution = 16
    tol = 0.05            # classification distance
    bounds = "auto"       # auto, wedge, circle, general, none
    bound_slack = 0.02    # half-plane slack for wedge/general checks
    circle_inflation = 0.05

``run_scenario`` writes ``spectrum.csv``, ``essential.csv``, ``regions.csv``
(when a bound applies), ``report.json`` and ``spectrum.svg``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .assembly import DEFAULT_DENSE_CAP, build_operator
from .bounds import BoundRegion, bound_region
from .eig import DISCRETE, ESSENTIAL, SpectrumResult, classify, eig_arnoldi, eig_dense
from .errors import ConfigError, RegimeError, SizeError
from .media import EPS0, MU0, Box, Grid, ScattererSpec, derive_background, rasterize
from .svgplot import emit_svg
from .symbol import essential_spectrum

__all__ = [
    "RunOptions",
    "Scenario",
    "ScenarioReport",
    "load_scenario",
    "parse_scenario",
    "list_scenarios",
    "scenario_path",
    "run_scenario",
    "summarize",
]

log = logging.getLogger(__name__)

_MODES = ("dense", "arnoldi")
_BOUNDS = ("auto", "wedge", "circle", "general", "none")


@dataclass(frozen=True)
class RunOptions:
    mode: str = "dense"
    arnoldi_k: int = 8
    sphere_resolution: int = 16
    tol: float = 0.05
    bounds: str = "auto"
    bound_slack: float = 0.02
    circle_inflation: float = 0.05
    dense_cap: int = DEFAULT_DENSE_CAP


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    spec: ScattererSpec
    options: RunOptions
    source: Optional[Path] = None


@dataclass(frozen=True)
class ScenarioReport:
    scenario_id: str
    outdir: Path
    spectrum_csv: Path
    essential_csv: Path
    regions_csv: Optional[Path]
    report_json: Path
    svg: Path
    summary: dict
    regions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def _err(where: str, msg: str) -> ConfigError:
    return ConfigError(f"{where}: {msg}")


def _number(table: dict, key: str, where: str, default=None, positive=False, nonneg=False) -> Optional[float]:
    if key not in table:
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(f"{where}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise _err(f"{where}.{key}", f"must be positive, got {v}")
    if nonneg and not v >= 0:
        raise _err(f"{where}.{key}", f"must be non-negative, got {v}")
    return v


def _tensor(v, where: str):
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise _err(where, f"expected a number, 3-vector or 3x3 array, got {v!r}") from None
    if a.shape not in ((), (3,), (3, 3)):
        raise _err(where, f"expected a number, 3-vector or 3x3 array, got shape {a.shape}")
    return a if a.ndim else float(a)


def _conductivity(table: dict, where: str, omega: float):
    if "sigma" in table and "sigma_rel" in table:
        raise _err(where, "give either sigma or sigma_rel, not both")
    if "sigma_rel" in table:
        return _tensor(table["sigma_rel"], f"{where}.sigma_rel") * (omega * EPS0)
    return _tensor(table.get("sigma", 0.0), f"{where}.sigma")


def _check_keys(table: dict, allowed: set, where: str):
    extra = sorted(set(table) - allowed)
    if extra:
        raise _err(where, f"unknown key(s) {', '.join(extra)}")


def parse_scenario(data: dict, source: Optional[Path] = None, default_id: str = "scenario") -> Scenario:
    """Validate a decoded TOML document and build the scenario."""
    _check_keys(data, {"id", "description", "background", "frequency", "grid", "box", "run"}, "top level")
    sid = str(data.get("id", default_id))
    for sect in ("frequency", "grid"):
        if sect not in data or not isinstance(data[sect], dict):
            raise _err(sect, "missing section")
    freq = data["frequency"]
    _check_keys(freq, {"hz"}, "frequency")
    hz = _number(freq, "hz", "frequency", positive=True)
    if hz is None:
        raise _err("frequency.hz", "missing")
    omega = 2.0 * np.pi * hz

    bg = data.get("background", {})
    _check_keys(bg, {"eps_r", "mu_r", "sigma", "sigma_rel"}, "background")
    sigma_b = _conductivity(bg, "background", omega)
    if not isinstance(sigma_b, float):
        raise _err("background.sigma", "background must be isotropic (scalar)")
    eps_b = _number(bg, "eps_r", "background", 1.0, positive=True) * EPS0
    mu_b = _number(bg, "mu_r", "background", 1.0, positive=True) * MU0
    if sigma_b < 0:
        raise _err("background.sigma", f"must be non-negative, got {sigma_b}")
    medium = derive_background(sigma_b, eps_b, mu_b, omega)

    grid_t = data["grid"]
    _check_keys(grid_t, {"dims", "h", "h_wavelengths"}, "grid")
    dims = grid_t.get("dims")
    if (not isinstance(dims, list) or len(dims) != 3
            or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims)):
        raise _err("grid.dims", f"expected three positive integers, got {dims!r}")
    if ("h" in grid_t) == ("h_wavelengths" in grid_t):
        raise _err("grid", "give exactly one of h and h_wavelengths")
    if "h" in grid_t:
        h = _number(grid_t, "h", "grid", positive=True)
    else:
        h = _number(grid_t, "h_wavelengths", "grid", positive=True) * medium.wavelength
    grid = Grid(tuple(dims), h)

    boxes = []
    raw_boxes = data.get("box", [])
    if not isinstance(raw_boxes, list):
        raise _err("box", "use [[box]] array-of-tables syntax")
    for n, b in enumerate(raw_boxes):
        where = f"box[{n}]"
        _check_keys(b, {"lo", "hi", "eps_r", "sigma", "sigma_rel", "name"}, where)
        try:
            lo = np.asarray(b["lo"], dtype=float)
            hi = np.asarray(b["hi"], dtype=float)
        except KeyError as e:
            raise _err(where, f"missing {e.args[0]}") from None
        except (TypeError, ValueError):
            raise _err(where, "lo/hi must be 3-vectors of numbers") from None
        if lo.shape != (3,) or hi.shape != (3,):
            raise _err(where, "lo/hi must be 3-vectors")
        eps = _tensor(b.get("eps_r", 1.0), f"{where}.eps_r")
        sigma = _conductivity(b, where, omega)
        boxes.append(Box(tuple(lo * h), tuple(hi * h), sigma=sigma, eps=np.asarray(eps) * EPS0))
    spec = ScattererSpec(grid, medium, tuple(boxes))

    run = data.get("run", {})
    _check_keys(run, {"mode", "arnoldi_k", "sphere_resolution", "tol", "bounds", "bound_slack",
                      "circle_inflation", "dense_cap"}, "run")
    opts = RunOptions(
        mode=str(run.get("mode", "dense")),
        arnoldi_k=int(run.get("arnoldi_k", 8)),
        sphere_resolution=int(run.get("sphere_resolution", 16)),
        tol=_number(run, "tol", "run", 0.05, positive=True),
        bounds=str(run.get("bounds", "auto")),
        bound_slack=_number(run, "bound_slack", "run", 0.02, nonneg=True),
        circle_inflation=_number(run, "circle_inflation", "run", 0.05, nonneg=True),
        dense_cap=int(run.get("dense_cap", DEFAULT_DENSE_CAP)),
    )
    _validate_options(opts)
    return Scenario(sid, str(data.get("description", "")), spec, opts, source)


def _validate_options(opts: RunOptions):
    if opts.mode not in _MODES:
        raise _err("run.mode", f"expected one of {_MODES}, got {opts.mode!r}")
    if opts.bounds not in _BOUNDS:
        raise _err("run.bounds", f"expected one of {_BOUNDS}, got {opts.bounds!r}")
    if opts.sphere_resolution < 8:
        raise _err("run.sphere_resolution", f"must be at least 8, got {opts.sphere_resolution}")
    if opts.arnoldi_k < 1:
        raise _err("run.arnoldi_k", "must be positive")
    if opts.dense_cap < 1:
        raise _err("run.dense_cap", "must be positive")
    if not opts.tol > 0:
        raise _err("run.tol", "must be positive")


def list_scenarios() -> list[str]:
    root = resources.files("viespec") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def scenario_path(name_or_path) -> Path:
    """A filesystem path, or the bundled scenario of that name."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = resources.files("viespec") / "scenarios" / f"{name_or_path}.toml"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"{name_or_path}: no such file or bundled scenario")


def load_scenario(name_or_path) -> Scenario:
    path = scenario_path(name_or_path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as e:
        # the decoder message carries "(at line L, column C)"
        raise ConfigError(f"{path}: {e}") from None
    try:
        return parse_scenario(data, path, default_id=path.stem)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def summarize(spectrum: SpectrumResult) -> dict:
    """Statistics recomputable from ``spectrum.csv`` alone."""
    lam = spectrum.eigenvalues
    mags = np.abs(lam)
    n = len(lam)
    n_ess = int(np.sum(spectrum.classification == ESSENTIAL))
    return {
        "n_eigenvalues": n,
        "cluster_fraction": n_ess / n if n else 0.0,
        "off_segment_count": int(np.sum(spectrum.classification == DISCRETE)),
        "spectral_radius": float(mags.max()) if n else 0.0,
        "min_abs": float(mags.min()) if n else 0.0,
    }


def _apply_overrides(opts: RunOptions, overrides: Optional[dict]) -> RunOptions:
    if not overrides:
        return opts
    clean = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(clean) - set(RunOptions.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown override(s): {', '.join(sorted(unknown))}")
    new = RunOptions(**{**opts.__dict__, **clean})
    _validate_options(new)
    return new


def _bound_check(region: BoundRegion, spectrum: SpectrumResult, opts: RunOptions) -> dict:
    lam = spectrum.eigenvalues
    if region.is_disk_union:
        # disks are checked against every eigenvalue, essential cluster included
        inside = region.contains(lam, inflation=opts.circle_inflation)
        checked = lam
    else:
        disc = spectrum.classification == DISCRETE
        checked = lam[disc]
        inside = region.contains(checked, slack=opts.bound_slack)
    return {
        "kind": region.kind,
        "checked": int(len(checked)),
        "violations": int(np.sum(~inside)),
        "max_signed_distance": float(region.signed_distance(checked).max()) if len(checked) else None,
        "distance_to_origin": region.distance_to_origin(),
        "markers": {k: [v.real, v.imag] for k, v in sorted(region.markers.items())},
        "primitives": region.primitives(),
    }


def run_scenario(config, outdir, overrides: Optional[dict] = None) -> ScenarioReport:
    """Full pipeline for one scenario; ``config`` is a path, bundled name or Scenario."""
    sc = config if isinstance(config, Scenario) else load_scenario(config)
    opts = _apply_overrides(sc.options, overrides)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    spec = sc.spec
    fld = rasterize(spec)
    medium = spec.background
    op = build_operator(spec.grid, fld, medium)
    if opts.mode == "dense":
        if spec.grid.n_cells > opts.dense_cap:
            raise SizeError(
                f"{sc.id}: {spec.grid.n_cells} cells exceed the dense cap {opts.dense_cap}; use mode = \"arnoldi\""
            )
        spectrum = eig_dense(op.to_dense(opts.dense_cap))
    else:
        k = min(opts.arnoldi_k, op.n_unknowns - 1)
        spectrum = eig_arnoldi(op, k) if k > 0 else eig_dense(op.to_dense(opts.dense_cap))
    ess = essential_spectrum(fld, opts.sphere_resolution)
    spectrum = classify(spectrum, ess, opts.tol)

    warnings = []
    summary = summarize(spectrum)
    summary["mode"] = opts.mode
    summary["n_unknowns"] = op.n_unknowns
    summary["uniqueness_regime"] = fld.uniqueness_regime(medium)
    if summary["uniqueness_regime"] and summary["n_eigenvalues"] and summary["min_abs"] < 1e-8:
        warnings.append(f"eigenvalue near 0 (|lambda| = {summary['min_abs']:.3g}) although the uniqueness condition holds")

    region = None
    if opts.bounds != "none":
        try:
            region = bound_region(fld, medium, opts.bounds)
        except RegimeError as e:
            raise RegimeError(f"{sc.id}: {e}") from None
    regions = []
    regions_csv = None
    if region is not None:
        check = _bound_check(region, spectrum, opts)
        regions.append(check)
        regions_csv = region.to_csv(out / "regions.csv")
        if check["violations"]:
            warnings.append(f"{check['violations']} of {check['checked']} checked eigenvalues outside the {region.kind} region")

    spectrum_csv = spectrum.to_csv(out / "spectrum.csv")
    essential_csv = ess.to_csv(out / "essential.csv")
    svg = emit_svg(spectrum, ess, [region] if region is not None else [], out / "spectrum.svg", title=sc.id)
    for w in warnings:
        log.warning("%s: %s", sc.id, w)

    report_json = out / "report.json"
    doc = {
        "scenario": sc.id,
        "description": sc.description,
        "files": {
            "spectrum": spectrum_csv.name,
            "essential": essential_csv.name,
            "regions": regions_csv.name if regions_csv else None,
            "svg": svg.name,
        },
        "summary": summary,
        "bounds": regions,
        "essential_endpoints": [[p.real, p.imag] for p in ess.segment_endpoints],
        "warnings": warnings,
    }
    report_json.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return ScenarioReport(sc.id, out, spectrum_csv, essential_csv, regions_csv, report_json, svg,
                          summary, regions, warnings)
