"""TOML experiment configs with strict schemas.

Every key is checked: unknown keys anywhere in the file raise ConfigError, as
do wrong types, so a typo never silently falls back to a default.  Matrices
are nested arrays of numbers; complex matrices split into {re = ..., im = ...}.
Graph edges may sit inline as [[u, v], ...] or in a side file referenced by
edge_file, one "u v" pair per line.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

KINDS = ("lindblad", "davies", "graphstate", "fermion", "product")

_MODEL_KEYS = {
    "lindblad": {"hamiltonian": True, "jumps": False},
    "davies": {"hamiltonian": True, "couplings": True, "beta": True, "gamma0": False},
    "graphstate": {
        "vertices": True,
        "edges": False,
        "edge_file": False,
        "beta": True,
        "g2": False,
    },
    "fermion": {"frequencies": True, "couplings": True, "beta": True, "gamma0": False},
    "product": {"copies": True, "beta": True, "g2": False},
}

_ANALYSIS_DEFAULTS = {
    "decay": False,
    "times": (0.25, 0.5, 1.0, 2.0, 4.0, 8.0),
    "estimate": False,
    "restarts": 24,
    "hypercontractive": False,
    "hc_times": (0.1, 0.5, 1.0),
    "hc_samples": 50,
    "blocks": False,
    "epsilon": 0.1,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: what to build and which analyses to run."""

    kind: str
    seed: int
    model: dict
    analysis: dict
    raw: dict = field(repr=False)

    def with_overrides(self, *, seed: int | None = None, **model_updates) -> "ExperimentConfig":
        model = dict(self.model)
        model.update(model_updates)
        raw = dict(self.raw)
        raw["model"] = dict(raw.get("model", {}))
        raw["model"].update(model_updates)
        new_seed = self.seed if seed is None else seed
        raw["seed"] = new_seed
        return ExperimentConfig(
            kind=self.kind,
            seed=new_seed,
            model=model,
            analysis=self.analysis,
            raw=raw,
        )


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _expect_table(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected a table, got {type(value).__name__}")
    return value


def _expect_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        _fail(path, f"expected a boolean, got {value!r}")
    return value


def _expect_int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _expect_float(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    out = float(value)
    if positive and out <= 0.0:
        _fail(path, f"must be positive, got {out}")
    return out


def _expect_float_list(value, path: str) -> tuple:
    if not isinstance(value, list):
        _fail(path, f"expected an array of numbers, got {value!r}")
    return tuple(_expect_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _real_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(
        isinstance(row, list) for row in value
    ):
        _fail(path, "expected a nested array of numbers")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            _fail(path, f"row {i} has {len(row)} entries, expected {width}")
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                _fail(f"{path}[{i}][{j}]", f"expected a number, got {entry!r}")
    return np.asarray(value, dtype=float)


def _matrix(value, path: str) -> np.ndarray:
    """A real nested array, or {re = ..., im = ...} for complex entries."""
    if isinstance(value, dict):
        unknown = set(value) - {"re", "im"}
        if unknown:
            _fail(path, f"unknown matrix keys {sorted(unknown)}")
        if "re" not in value:
            _fail(path, "complex matrix needs an 're' part")
        re = _real_matrix(value["re"], f"{path}.re")
        if "im" in value:
            im = _real_matrix(value["im"], f"{path}.im")
            if im.shape != re.shape:
                _fail(path, f"re/im shapes differ: {re.shape} vs {im.shape}")
            return re + 1j * im
        return re.astype(complex)
    return _real_matrix(value, path)


def _square_matrix(value, path: str) -> np.ndarray:
    m = _matrix(value, path)
    if m.shape[0] != m.shape[1]:
        _fail(path, f"expected a square matrix, got shape {m.shape}")
    return m


def _edges(value, path: str) -> tuple:
    if not isinstance(value, list):
        _fail(path, f"expected an array of [u, v] pairs, got {value!r}")
    out = []
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            _fail(f"{path}[{i}]", f"expected a [u, v] pair, got {pair!r}")
        out.append((_expect_int(pair[0], f"{path}[{i}][0]", 0),
                    _expect_int(pair[1], f"{path}[{i}][1]", 0)))
    return tuple(out)


def _validate_model(kind: str, table: dict, base_dir: Path) -> dict:
    allowed = _MODEL_KEYS[kind]
    unknown = set(table) - set(allowed)
    if unknown:
        _fail("model", f"unknown keys for kind {kind!r}: {sorted(unknown)}")
    missing = [k for k, required in allowed.items() if required and k not in table]
    if missing:
        _fail("model", f"missing required keys for kind {kind!r}: {missing}")

    model: dict = {}
    if kind == "lindblad":
        model["hamiltonian"] = _square_matrix(table["hamiltonian"], "model.hamiltonian")
        jumps = table.get("jumps", [])
        if not isinstance(jumps, list):
            _fail("model.jumps", "expected an array of matrices")
        model["jumps"] = tuple(
            _square_matrix(j, f"model.jumps[{i}]") for i, j in enumerate(jumps)
        )
    elif kind == "davies":
        model["hamiltonian"] = _square_matrix(table["hamiltonian"], "model.hamiltonian")
        couplings = table["couplings"]
        if not isinstance(couplings, list) or not couplings:
            _fail("model.couplings", "expected a nonempty array of matrices")
        model["couplings"] = tuple(
            _square_matrix(c, f"model.couplings[{i}]") for i, c in enumerate(couplings)
        )
        model["beta"] = _expect_float(table["beta"], "model.beta", positive=True)
        model["gamma0"] = _expect_float(table.get("gamma0", 1.0), "model.gamma0", positive=True)
    elif kind == "graphstate":
        model["vertices"] = _expect_int(table["vertices"], "model.vertices", 1)
        if ("edges" in table) == ("edge_file" in table):
            _fail("model", "give exactly one of 'edges' and 'edge_file'")
        if "edges" in table:
            model["edges"] = _edges(table["edges"], "model.edges")
        else:
            from .graphstate import parse_edge_list

            name = table["edge_file"]
            if not isinstance(name, str):
                _fail("model.edge_file", f"expected a path string, got {name!r}")
            edge_path = Path(name)
            if not edge_path.is_absolute():
                edge_path = base_dir / edge_path
            try:
                model["edges"] = parse_edge_list(edge_path.read_text())
            except OSError as exc:
                _fail("model.edge_file", f"cannot read {edge_path}: {exc}")
        model["beta"] = _expect_float(table["beta"], "model.beta", positive=True)
        model["g2"] = _expect_float(table.get("g2", 1.0), "model.g2", positive=True)
    elif kind == "fermion":
        model["frequencies"] = _expect_float_list(table["frequencies"], "model.frequencies")
        model["couplings"] = _matrix(table["couplings"], "model.couplings")
        model["beta"] = _expect_float(table["beta"], "model.beta", positive=True)
        model["gamma0"] = _expect_float(table.get("gamma0", 1.0), "model.gamma0", positive=True)
    elif kind == "product":
        model["copies"] = _expect_int(table["copies"], "model.copies", 1)
        model["beta"] = _expect_float(table["beta"], "model.beta", positive=True)
        model["g2"] = _expect_float(table.get("g2", 1.0), "model.g2", positive=True)
    return model


def _validate_analysis(table: dict) -> dict:
    unknown = set(table) - set(_ANALYSIS_DEFAULTS)
    if unknown:
        _fail("analysis", f"unknown keys {sorted(unknown)}")
    out = dict(_ANALYSIS_DEFAULTS)
    for key, value in table.items():
        if key in ("decay", "estimate", "hypercontractive", "blocks"):
            out[key] = _expect_bool(value, f"analysis.{key}")
        elif key in ("times", "hc_times"):
            values = _expect_float_list(value, f"analysis.{key}")
            for i, t in enumerate(values):
                if t < 0.0:
                    _fail(f"analysis.{key}[{i}]", "times must be nonnegative")
            out[key] = values
        elif key in ("restarts", "hc_samples"):
            out[key] = _expect_int(value, f"analysis.{key}", 1)
        elif key == "epsilon":
            eps = _expect_float(value, "analysis.epsilon")
            if not (0.0 < eps < 1.0):
                _fail("analysis.epsilon", f"must lie in (0, 1), got {eps}")
            out[key] = eps
    return out


def parse_config(data: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    data = _expect_table(data, "config")
    unknown = set(data) - {"kind", "seed", "model", "analysis"}
    if unknown:
        _fail("config", f"unknown top-level keys {sorted(unknown)}")
    if "kind" not in data:
        _fail("config", "missing required key 'kind'")
    kind = data["kind"]
    if kind not in KINDS:
        _fail("kind", f"expected one of {KINDS}, got {kind!r}")
    seed = _expect_int(data.get("seed", 0), "seed", 0)
    if "model" not in data:
        _fail("config", "missing required table 'model'")
    model = _validate_model(kind, _expect_table(data["model"], "model"), Path(base_dir))
    analysis = _validate_analysis(_expect_table(data.get("analysis", {}), "analysis"))
    return ExperimentConfig(kind=kind, seed=seed, model=model, analysis=analysis, raw=data)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, path.parent)
