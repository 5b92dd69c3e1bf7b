"""YAML experiment configuration with strict validation.

Unknown keys are rejected, every error names its field, and the raw file bytes
are hashed so output artifacts can carry their provenance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import yaml

from .disorder import DisorderSpec
from .lattice import GraphSpec, Kind


class ConfigError(ValueError):
    """Invalid configuration; message lists ``section.key: problem`` lines."""


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _num_list(x) -> bool:
    return isinstance(x, list) and len(x) > 0 and all(_is_num(v) for v in x)


def _pair(x) -> bool:
    return isinstance(x, list) and len(x) == 2 and all(_is_num(v) for v in x)


def _pair_list(x) -> bool:
    return isinstance(x, list) and len(x) > 0 and all(_pair(v) for v in x)


# key -> (checker, default, required, description of the expected value)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "model": {
        "kind": (lambda x: x in ("sym", "diag"), None, True, "'sym' or 'diag'"),
        "gamma": (lambda x: _is_num(x) and x > 0, None, True, "a positive number"),
        "ell": (lambda x: isinstance(x, int) and x >= 1, 1, False, "an integer >= 1"),
        "cols": (lambda x: isinstance(x, int) and x >= 2, None, True, "an integer >= 2"),
        "rows": (lambda x: isinstance(x, int) and x >= 2, None, True, "an integer >= 2"),
    },
    "disorder": {
        "distribution": (lambda x: x in ("uniform", "density"), "uniform", False, "'uniform' or 'density'"),
        "omega_max": (lambda x: _is_num(x) and x >= 0, 1.0, False, "a nonnegative number"),
        "density": (_num_list, None, False, "a list of nonnegative numbers"),
    },
    "run": {
        "seed": (lambda x: isinstance(x, int) and x >= 0, 0, False, "a nonnegative integer"),
        "realizations": (lambda x: isinstance(x, int) and x >= 1, 1, False, "an integer >= 1"),
        "threads": (lambda x: isinstance(x, int) and x >= 1, 1, False, "an integer >= 1"),
        "output_dir": (lambda x: isinstance(x, str), "out", False, "a directory path"),
    },
    "moments": {
        "q": (lambda x: _is_num(x) and x >= 0, 1.0, False, "a nonnegative number"),
        "times": (_num_list, None, False, "a list of positive times"),
        "t_min": (lambda x: _is_num(x) and x > 0, 1.0, False, "a positive number"),
        "t_max": (lambda x: _is_num(x) and x > 0, 100.0, False, "a positive number"),
        "points": (lambda x: isinstance(x, int) and x >= 2, 8, False, "an integer >= 2"),
        "route": (lambda x: x in ("time", "energy", "both"), "time", False, "'time', 'energy' or 'both'"),
        "guard_margin": (lambda x: isinstance(x, int) and x >= 1, 5, False, "an integer >= 1"),
        "guard_mass": (lambda x: _is_num(x) and x > 0, 1e-3, False, "a positive number"),
    },
    "greens": {
        "z": (_pair_list, [[0.5, 0.05]], False, "a list of [re, im] pairs"),
        "targets": (_pair_list, [[0, 0]], False, "a list of [n1, n2] pairs"),
        "ladder": (_num_list, None, False, "a list of box sizes"),
        "halfline_sites": (lambda x: isinstance(x, int) and x >= 2, 4000, False, "an integer >= 2"),
    },
    "density": {
        "e_min": (_is_num, -4.0, False, "a number"),
        "e_max": (_is_num, 6.0, False, "a number"),
        "points": (lambda x: isinstance(x, int) and x >= 2, 2001, False, "an integer >= 2"),
        "eta": (lambda x: _is_num(x) and x > 0, 1e-4, False, "a positive number"),
        "halfline_sites": (lambda x: isinstance(x, int) and x >= 2, 2000, False, "an integer >= 2"),
        "adapted": (lambda x: isinstance(x, bool), False, False, "a boolean"),
        "points_per_band": (lambda x: isinstance(x, int) and x >= 2, 128, False, "an integer >= 2"),
    },
    "boole": {
        "atoms": (lambda x: isinstance(x, int) and 1 <= x, 5, False, "an integer >= 1"),
        "trials": (lambda x: isinstance(x, int) and x >= 1, 100, False, "an integer >= 1"),
        "t_values": (_num_list, [0.5, 5.0, 50.0], False, "a list of positive numbers"),
        "measure_file": (lambda x: isinstance(x, str), None, False, "a CSV path"),
    },
    "estimators": {
        "s": (lambda x: _is_num(x) and 0 < x < 1, 0.5, False, "a number in (0, 1)"),
        "z": (_pair, None, False, "[re, im]"),
        "max_distance": (lambda x: isinstance(x, int) and x >= 2, 10, False, "an integer >= 2"),
        "realizations": (lambda x: isinstance(x, int) and x >= 30, 100, False, "an integer >= 30"),
        "length_1d": (lambda x: isinstance(x, int) and x >= 2, 60, False, "an integer >= 2"),
        "c_w": (lambda x: _is_num(x) and x > 0, 1.0, False, "a positive number"),
    },
    "contrast": {
        "q": (lambda x: _is_num(x) and x >= 0, 1.0, False, "a nonnegative number"),
        "sym_gamma": (lambda x: _is_num(x) and x > 0, 0.5, False, "a positive number"),
        "sym_cols": (lambda x: isinstance(x, int) and x >= 2, 80, False, "an integer >= 2"),
        "sym_rows": (lambda x: isinstance(x, int) and x >= 2, 160, False, "an integer >= 2"),
        "diag_ell": (lambda x: isinstance(x, int) and x >= 1, 2, False, "an integer >= 1"),
        "diag_cols": (lambda x: isinstance(x, int) and x >= 2, 80, False, "an integer >= 2"),
        "diag_rows": (lambda x: isinstance(x, int) and x >= 2, 80, False, "an integer >= 2"),
        "diag_gamma": (lambda x: x is None or (_is_num(x) and x > 0), None, False, "a positive number or null"),
        "gamma_fraction": (lambda x: _is_num(x) and 0 < x, 0.5, False, "a positive number"),
        "sym_t_max": (lambda x: _is_num(x) and x > 0, 128.0, False, "a positive number"),
        "diag_t_max": (lambda x: _is_num(x) and x > 0, 4096.0, False, "a positive number"),
        "threshold_length": (lambda x: isinstance(x, int) and x >= 2, 60, False, "an integer >= 2"),
        "threshold_realizations": (lambda x: isinstance(x, int) and x >= 30, 100, False, "an integer >= 30"),
    },
}

_REQUIRED_SECTIONS = ("model", "disorder", "run")


@dataclass
class Config:
    """Validated configuration: per-section dicts with defaults applied."""

    sections: dict
    config_hash: str
    path: str

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def model_spec(self, **overrides) -> GraphSpec:
        m = dict(self.sections["model"])
        m.update(overrides)
        return GraphSpec(kind=Kind(m["kind"]), gamma=m["gamma"], ell=m["ell"], cols=m["cols"], rows=m["rows"])

    def disorder_spec(self, seed: int | None = None) -> DisorderSpec:
        d = self.sections["disorder"]
        density = tuple(d["density"]) if d.get("density") else None
        return DisorderSpec(
            distribution=d["distribution"],
            omega_max=float(d["omega_max"]),
            seed=self.sections["run"]["seed"] if seed is None else seed,
            density=density,
        )


def validate_data(data) -> list[str]:
    """Schema errors for parsed YAML data; empty list means valid."""
    errors: list[str] = []
    if not isinstance(data, dict):
        return ["top level: expected a mapping of sections"]
    for section in data:
        if section not in _SCHEMA:
            errors.append(f"{section}: unknown section")
    for section in _REQUIRED_SECTIONS:
        if section not in data:
            errors.append(f"{section}: required section missing")
    for section, keys in _SCHEMA.items():
        if section not in data:
            continue
        block = data[section]
        if not isinstance(block, dict):
            errors.append(f"{section}: expected a mapping")
            continue
        for key in block:
            if key not in keys:
                errors.append(f"{section}.{key}: unknown key")
        for key, (check, _default, required, expected) in keys.items():
            if key in block:
                if not check(block[key]):
                    errors.append(f"{section}.{key}: expected {expected}, got {block[key]!r}")
            elif required:
                errors.append(f"{section}.{key}: required key missing")
    if errors:
        return errors
    # cross-field checks
    model = data.get("model", {})
    if model.get("kind") == "diag":
        ell = model.get("ell", 1)
        if model.get("rows") is not None and model["rows"] < ell:
            errors.append(
                "model.rows: diag model needs rows >= ell "
                f"(rows={model['rows']}, ell={ell}; one vertical segment must fit)"
            )
    dis = data.get("disorder", {})
    if dis.get("distribution") == "density" and not dis.get("density"):
        errors.append("disorder.density: required when distribution is 'density'")
    if dis.get("density") is not None:
        vals = dis["density"]
        if any(v < 0 for v in vals) or not any(v > 0 for v in vals):
            errors.append("disorder.density: values must be nonnegative and not all zero")
    return errors


def _apply_defaults(data: dict) -> dict:
    out = {}
    for section, keys in _SCHEMA.items():
        block = dict(data.get(section, {}))
        for key, (_check, default, _required, _expected) in keys.items():
            block.setdefault(key, default)
        out[section] = block
    return out


def load_config(path: str | Path) -> Config:
    raw = Path(path).read_bytes()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    errors = validate_data(data)
    if errors:
        raise ConfigError("\n".join(errors))
    return Config(
        sections=_apply_defaults(data),
        config_hash=hashlib.sha256(raw).hexdigest(),
        path=str(path),
    )
