"""Experiment runner: configs in, flat numeric tables out.

A ResultTable is a list of named float columns plus string metadata that
round-trips through CSV.  Metadata lines start with '#', hold json-encoded
values, and carry the full config echo, the package version, and a provenance
tag per bound column, so a results file is self-describing.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .davies import DaviesModel, build_davies, flat_bath
from .errors import ConfigError, UnknownColumn
from .fermion import (
    FermionModel,
    bound_fermion_lsi,
    canonicalize,
    fermion_block_norm_check,
    fermion_q_bound_check,
    mode_basis,
    verify_block_structure,
)
from .graphstate import (
    GraphModel,
    bound_graph_lsi,
    graph_consistency_residual,
    graph_davies,
    ground_overlap,
    local_thermal_qubit,
    prep_time,
)
from .lindblad import (
    analyze,
    decay_curve,
    lindblad_from_ops,
    mixing_bound_gap,
    mixing_bound_lsi,
)
from .lsi import bound_general, estimate_lsi, verify_hypercontractivity
from .product import (
    bound_product_lsi,
    build_product,
    excitation_blocks,
    product_block_norm_constant,
)
from .weighted import WeightedContext

_FORMAT = "%.17g"


@dataclass
class ResultTable:
    """Ordered float columns plus json-valued string metadata."""

    columns: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def names(self) -> list:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise UnknownColumn(f"no column {name!r}; have {self.names}")
        return self.columns[name]

    def set_meta(self, key: str, value) -> None:
        self.metadata[key] = json.dumps(value, separators=(",", ":"))

    def get_meta(self, key: str):
        return json.loads(self.metadata[key])

    def to_csv(self) -> str:
        lines = [f"# {key} = {value}" for key, value in self.metadata.items()]
        lines.append(",".join(self.names))
        for i in range(self.n_rows):
            lines.append(",".join(_FORMAT % self.columns[name][i] for name in self.names))
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        metadata: dict = {}
        header: list | None = None
        rows: list = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, value = body.partition(" = ")
                if sep:
                    metadata[key] = value
                continue
            if header is None:
                header = [name.strip() for name in line.split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
        if header is None:
            raise ConfigError("CSV text has no header line")
        columns = {name: [row[i] for row in rows] for i, name in enumerate(header)}
        return cls(columns=columns, metadata=metadata)

    @classmethod
    def load_csv(cls, path) -> "ResultTable":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_csv(handle.read())


def emit_plotdata(table: ResultTable, path, columns=None) -> None:
    """Whitespace-separated columns with a '#' header, first column as x."""
    names = list(columns) if columns is not None else table.names
    for name in names:
        if name not in table.columns:
            raise UnknownColumn(f"no column {name!r}; have {table.names}")
    lines = ["# " + " ".join(names)]
    for i in range(table.n_rows):
        lines.append(" ".join(_FORMAT % table.columns[name][i] for name in names))
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return text


def _tagged(scalars: dict, tags: dict, name: str, report) -> None:
    scalars[name] = report.value
    tags[name] = {"equation": report.equation, "inputs": report.inputs}


def _build_model(config: ExperimentConfig):
    """Returns (analysis, bound_report_or_None, extras)."""
    m = config.model
    if config.kind == "lindblad":
        generator = lindblad_from_ops(m["hamiltonian"], m["jumps"])
        analysis = analyze(generator)
        bound = bound_general(analysis.gap, analysis.fixed_point) if analysis.reversible else None
        return analysis, bound, {"bound_column": "alpha_lower_eq30"}
    if config.kind == "davies":
        model = DaviesModel(
            hamiltonian=m["hamiltonian"],
            couplings=m["couplings"],
            bath=flat_bath(m["beta"], m["gamma0"]),
        )
        analysis = build_davies(model)
        bound = bound_general(analysis.gap, analysis.fixed_point)
        return analysis, bound, {"bound_column": "alpha_lower_eq30"}
    if config.kind == "graphstate":
        graph = GraphModel(m["vertices"], m["edges"], m["beta"], m["g2"])
        product = graph_davies(graph)
        bound = bound_graph_lsi(graph)
        return product.analysis, bound, {
            "bound_column": "alpha_lower_eq76",
            "graph": graph,
            "product": product,
        }
    if config.kind == "fermion":
        model = FermionModel(
            frequencies=m["frequencies"],
            couplings=m["couplings"],
            beta=m["beta"],
            bath=flat_bath(m["beta"], m["gamma0"]),
        )
        canonical = canonicalize(model)
        nu_max = max(canonical.frequencies)
        bound = (
            bound_fermion_lsi(canonical.gap_lower, nu_max, canonical.beta)
            if canonical.gap_lower > 0.0
            else None
        )
        return canonical.analysis, bound, {
            "bound_column": "alpha_lower_eq137",
            "canonical": canonical,
        }
    if config.kind == "product":
        factor = local_thermal_qubit(m["beta"], m["g2"])
        product = build_product([factor] * m["copies"])
        bound = bound_product_lsi(factor.gap, 2, 3)
        return product.analysis, bound, {
            "bound_column": "alpha_lower_eq38",
            "product": product,
            "factor": factor,
        }
    raise ConfigError(f"unknown kind {config.kind!r}")


def run(config: ExperimentConfig) -> ResultTable:
    """Build the configured generator and compute the requested columns.

    Scalar analyses give a one-row table.  Decay mode instead gives one row
    per requested time, with the scalar results moved into the metadata.
    """
    analysis, bound, extras = _build_model(config)
    opts = config.analysis
    tags: dict = {}
    scalars: dict = {}

    scalars["gap"] = analysis.gap
    scalars["reversible"] = 1.0 if analysis.reversible else 0.0
    scalars["primitive"] = 1.0 if analysis.primitive else 0.0
    if analysis.fixed_point is not None:
        scalars["sigma_inv_norm"] = analysis.fixed_point.inv_norm
    if bound is not None:
        _tagged(scalars, tags, extras["bound_column"], bound)

    if config.kind == "graphstate":
        graph = extras["graph"]
        scalars["vertices"] = float(graph.n_vertices)
        prep = prep_time(graph.n_vertices, opts["epsilon"], graph.g2)
        scalars["beta_required"] = prep.beta_required
        scalars["t_epsilon"] = prep.t_epsilon
        scalars["ground_overlap"] = ground_overlap(graph.n_vertices, graph.beta)
        if opts["blocks"]:
            scalars["consistency_residual"] = graph_consistency_residual(graph)
    elif config.kind == "fermion":
        canonical = extras["canonical"]
        scalars["gap_lower"] = canonical.gap_lower
        if opts["blocks"]:
            basis = mode_basis(canonical)
            report = verify_block_structure(canonical, basis)
            scalars["block_residual_max"] = max(r for _, r in report.values())
            qcheck = fermion_q_bound_check(canonical, 1, basis)
            scalars["q_max_block1"] = qcheck.max_magnitude
            scalars["q_ceiling_block1"] = qcheck.ceiling
            scalars["norm_ratio_block1"] = fermion_block_norm_check(
                canonical, 1, samples=100, seed=config.seed, basis=basis
            )
    elif config.kind == "product":
        product = extras["product"]
        factor = extras["factor"]
        scalars["copies"] = float(product.n_sites)
        scalars["block_constant"] = product_block_norm_constant(2, 3)
        if opts["blocks"]:
            blocks = excitation_blocks(product)
            scalars["block_count"] = float(len(blocks))
            scalars["block_elements"] = float(sum(b.size for b in blocks))

    ctx = (
        WeightedContext(analysis.fixed_point)
        if analysis.fixed_point is not None
        else None
    )

    if opts["estimate"]:
        if ctx is None:
            raise ConfigError("estimate requires a primitive generator")
        estimate = estimate_lsi(
            ctx,
            analysis.generator,
            restarts=opts["restarts"],
            seed=config.seed,
            reference=bound,
            analysis=analysis,
        )
        scalars["alpha_hat"] = estimate.alpha_upper
        scalars["estimate_converged"] = 1.0 if estimate.converged else 0.0

    if opts["hypercontractive"]:
        if ctx is None or bound is None:
            raise ConfigError("hypercontractive check needs a certified bound")
        scalars["hc_violation"] = verify_hypercontractivity(
            ctx,
            analysis.generator,
            bound.value,
            opts["hc_times"],
            samples=opts["hc_samples"],
            seed=config.seed,
            analysis=analysis,
        )

    table = ResultTable()
    table.set_meta("lsq_version", __version__)
    table.set_meta("kind", config.kind)
    table.set_meta("seed", config.seed)
    table.set_meta("config", _jsonable(config.raw))
    for name, tag in tags.items():
        table.set_meta(f"tag.{name}", tag["equation"])
        table.set_meta(f"inputs.{name}", _jsonable(tag["inputs"]))

    if opts["decay"]:
        if ctx is None:
            raise ConfigError("decay requires a primitive generator")
        times = np.asarray(opts["times"], dtype=float)
        dim = analysis.dim
        rho0 = np.eye(dim) / dim
        distances = decay_curve(analysis.generator, rho0, times, analysis=analysis)
        table.columns["t"] = list(map(float, times))
        table.columns["trace_distance"] = list(map(float, distances))
        table.columns["eq9_bound"] = list(
            map(float, mixing_bound_gap(analysis.fixed_point, analysis.gap, times))
        )
        table.set_meta("tag.eq9_bound", "Eq.9")
        if bound is not None:
            table.columns["eq10_bound"] = list(
                map(float, mixing_bound_lsi(analysis.fixed_point, bound.value, times))
            )
            table.set_meta("tag.eq10_bound", "Eq.10")
        for name, value in scalars.items():
            table.set_meta(f"scalar.{name}", value)
    else:
        for name, value in scalars.items():
            table.columns[name] = [float(value)]
    return table


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


_SWEEP_PARAMS = {
    "lindblad": (),
    "davies": ("beta", "gamma0"),
    "graphstate": ("beta", "g2", "vertices"),
    "fermion": ("beta", "gamma0"),
    "product": ("beta", "g2", "copies"),
}

_INT_PARAMS = ("vertices", "copies")


def _thread_cap() -> int:
    raw = os.environ.get("LSQ_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"LSQ_THREADS must be an integer, got {raw!r}")


def sweep(config: ExperimentConfig, parameter: str, values) -> ResultTable:
    """Re-run the config once per parameter value, one row per value.

    Each row gets seed = base seed + row index, so runs are independent yet
    reproducible.  Decay mode is refused: sweeps need one-row scalar output.
    Rows run in parallel up to the LSQ_THREADS environment cap.
    """
    allowed = _SWEEP_PARAMS[config.kind]
    if parameter not in allowed:
        raise ConfigError(
            f"kind {config.kind!r} cannot sweep {parameter!r}; choose from {allowed}"
        )
    if config.analysis["decay"]:
        raise ConfigError("sweeps need scalar output; disable decay")

    cleaned = []
    for i, value in enumerate(values):
        v = float(value)
        if parameter in _INT_PARAMS:
            if not v.is_integer():
                raise ConfigError(f"values[{i}]: {parameter} must be an integer, got {value}")
            cleaned.append(int(v))
        else:
            cleaned.append(v)

    def one(i_value) -> dict:
        i, value = i_value
        sub = config.with_overrides(seed=config.seed + i, **{parameter: value})
        row_table = run(sub)
        return {name: col[0] for name, col in row_table.columns.items()}

    workers = min(_thread_cap(), max(1, len(cleaned)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, enumerate(cleaned)))
    else:
        rows = [one(pair) for pair in enumerate(cleaned)]

    table = ResultTable()
    table.set_meta("lsq_version", __version__)
    table.set_meta("kind", config.kind)
    table.set_meta("seed", config.seed)
    table.set_meta("config", _jsonable(config.raw))
    table.set_meta("sweep.parameter", parameter)
    table.set_meta("sweep.values", [float(v) for v in cleaned])
    table.columns[parameter] = [float(v) for v in cleaned]
    if rows:
        for name in rows[0]:
            table.columns.setdefault(name, [row[name] for row in rows])
    return table
