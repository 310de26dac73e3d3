"""Configuration files, hashing and on-disk formats."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .kernels import MalformedSpecError, spec_from_config, spec_to_config

SECTION_KEYS = {
    "grid": {"d", "N", "L"},
    "operator": {"form", "alpha", "sigma", "mu", "lambda", "profile_file"},
    "drift": {"mode", "amplitude", "delta", "velocity", "omega", "seed"},
    "forcing": {"mode", "amplitude", "delta", "seed"},
    "data": {"kind", "amplitude", "seed", "modes", "width", "epsilon_m"},
    "time": {"dt", "T", "epsilon", "cfl", "record_every", "snapshot_times"},
    "output": {"p_norms", "svg"},
    "experiment": {"name", "seed", "out", "checks", "preset"},
}


class ConfigError(ValueError):
    pass


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        out = {}
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            if callable(v) and not dataclasses.is_dataclass(v):
                v = getattr(obj, "name", "") or "profile"
            out[f.name] = _plain(v)
        return out
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return repr(obj) if not math.isfinite(obj) else obj
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def config_hash(obj) -> str:
    """sha256 of the canonical JSON form of a (nested) dataclass."""
    text = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    solver: object
    name: str = "run"
    seed: int = 0
    out: str = "out"
    checks: tuple[str, ...] = ()
    preset: str = ""
    svg: bool = False

    def hash(self) -> str:
        return config_hash(self)


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for sec in cp.sections():
        if sec not in SECTION_KEYS:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        unknown = set(cp[sec]) - SECTION_KEYS[sec]
        if unknown:
            raise ConfigError(f"{path}: unknown keys in [{sec}]: {', '.join(sorted(unknown))}")
    return cp


def experiment_from_config(path, seed: int | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from an INI file."""
    from .solver import DataSpec, DriftSpec, ForcingSpec, SolverConfig

    cp = read_config(path)
    get = lambda sec: dict(cp[sec]) if cp.has_section(sec) else {}
    try:
        grid = get("grid")
        d = int(grid.get("d", 1))
        if not cp.has_section("operator"):
            raise ConfigError(f"{path}: missing [operator] section")
        op = spec_from_config(get("operator"), d, Path(path).parent)
        dr = get("drift")
        drift = DriftSpec(
            mode=dr.get("mode", "none"),
            amplitude=float(dr.get("amplitude", 1.0)),
            delta=float(dr.get("delta", 0.9)),
            velocity=_floats(dr.get("velocity", "")),
            omega=float(dr.get("omega", 0.0)),
            seed=int(dr.get("seed", 0)),
        )
        fo = get("forcing")
        forcing = ForcingSpec(
            mode=fo.get("mode", "none"),
            amplitude=float(fo.get("amplitude", 0.0)),
            delta=float(fo.get("delta", 0.9)),
            seed=int(fo.get("seed", 1)),
        )
        ex = get("experiment")
        run_seed = int(ex.get("seed", 0)) if seed is None else seed
        da = get("data")
        modes = tuple(
            tuple(int(v) for v in m.split(":")) for m in da.get("modes", "1").split()
        )
        data = DataSpec(
            kind=da.get("kind", "rough"),
            amplitude=float(da.get("amplitude", 1.0)),
            seed=int(da.get("seed", run_seed)) if seed is None else seed,
            modes=modes,
            width=float(da.get("width", 0.3)),
        )
        tm = get("time")
        out = get("output")
        solver = SolverConfig(
            d=d, N=int(grid.get("N", 128)), L=float(grid.get("L", 1.0)),
            operator=op,
            epsilon=float(tm.get("epsilon", 0.0)),
            dt=float(tm.get("dt", 1e-2)),
            T=float(tm.get("T", 1.0)),
            drift=drift, forcing=forcing, data=data,
            epsilon_m=float(da.get("epsilon_m", 0.0)),
            cfl=float(tm.get("cfl", 0.5)),
            record_every=int(tm.get("record_every", 1)),
            snapshot_times=_floats(tm.get("snapshot_times", "")),
            p_norms=_floats(out.get("p_norms", "2")) or (2.0,),
        )
    except (MalformedSpecError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig(
        solver=solver,
        name=ex.get("name", Path(path).stem),
        seed=run_seed,
        out=ex.get("out", "out"),
        checks=tuple(c for c in ex.get("checks", "").replace(",", " ").split()),
        preset=ex.get("preset", ""),
        svg=out.get("svg", "false").lower() in ("1", "true", "yes"),
    )


def write_config(cfg, path, experiment: dict | None = None) -> None:
    """Write a solver configuration as INI (explicit-kernel profiles excepted)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["grid"] = {"d": str(cfg.d), "N": str(cfg.N), "L": repr(cfg.L)}
    cp["operator"] = spec_to_config(cfg.operator)
    dr = cfg.drift
    cp["drift"] = {"mode": dr.mode, "amplitude": repr(dr.amplitude), "delta": repr(dr.delta),
                   "omega": repr(dr.omega), "seed": str(dr.seed)}
    if dr.velocity:
        cp["drift"]["velocity"] = " ".join(repr(v) for v in dr.velocity)
    fo = cfg.forcing
    cp["forcing"] = {"mode": fo.mode, "amplitude": repr(fo.amplitude),
                     "delta": repr(fo.delta), "seed": str(fo.seed)}
    da = cfg.data
    cp["data"] = {"kind": da.kind, "amplitude": repr(da.amplitude), "seed": str(da.seed),
                  "modes": " ".join(":".join(str(v) for v in m) for m in da.modes),
                  "width": repr(da.width), "epsilon_m": repr(cfg.epsilon_m)}
    cp["time"] = {"dt": repr(cfg.dt), "T": repr(cfg.T), "epsilon": repr(cfg.epsilon),
                  "cfl": repr(cfg.cfl), "record_every": str(cfg.record_every),
                  "snapshot_times": " ".join(repr(t) for t in cfg.snapshot_times)}
    cp["output"] = {"p_norms": " ".join(repr(p) for p in cfg.p_norms)}
    if experiment:
        cp["experiment"] = {k: str(v) for k, v in experiment.items()}
    with open(path, "w") as fh:
        cp.write(fh)


def _sibling(path, suffix):
    # appended rather than substituted: stems such as ``t0.500000`` contain dots
    path = Path(path)
    return path.parent / (path.name + suffix)


def save_snapshot(path, field: np.ndarray, meta: dict) -> None:
    """Binary ``<path>.npy`` array plus a ``<path>.json`` sidecar."""
    np.save(_sibling(path, ".npy"), field)
    _sibling(path, ".json").write_text(json.dumps(_plain(meta), sort_keys=True, indent=1))


def load_snapshot(path):
    return np.load(_sibling(path, ".npy")), json.loads(_sibling(path, ".json").read_text())


def write_histories(traj, path) -> None:
    """Per-block sup-norm history as ``t, j, block_norm, config_hash`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "j", "block_norm", "config_hash"])
        for t, row in zip(traj.block_times, traj.block_linf):
            for j, v in zip(traj.block_j, row):
                w.writerow([repr(float(t)), int(j), repr(float(v)), traj.config_hash])


def read_golden(path) -> dict[str, float]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            k, v = line.split("=", 1)
            out[k.strip()] = float(v)
    return out


def write_golden(path, values: dict[str, float]) -> None:
    lines = [f"{k} = {values[k]!r}" for k in sorted(values)]
    Path(path).write_text("\n".join(lines) + "\n")
