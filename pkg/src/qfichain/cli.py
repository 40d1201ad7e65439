"""Command-line driver: ``run``, ``sweep`` and ``validate``.

A run is described by a JSON document. Unknown keys are rejected. Results
are written as one CSV per source (``simulation``, ``semiclassical``,
``beyond_sc``, ``oracle``), all with the same columns. Warnings raised during
a run go to ``<output>.log``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import beyond_sc, dynamics, gaussian, measures, oracle, semiclassics
from .model import ChainModel, QuenchPair, ground_magnetization, max_velocity

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
SCHEMA_VERSION = 1
COLUMNS = ("source", "method", "config_hash", "version", "protocol", "axis", "axis_value",
           "h", "gamma", "beta", "time", "subsystem_left", "subsystem_right", "size",
           "variance", "I_half", "I_third", "qfi_over4", "qfi_err", "chi", "lower", "upper")
PROTOCOLS = ("equilibrium", "single_kick", "kick_grid", "kick_periodic", "global_quench",
             "beyond_sc")
SOURCES = ("simulation", "semiclassical", "beyond_sc", "oracle")
ORACLE_MAX_SITES = 8

log = logging.getLogger("qfichain")


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


# ------------------------------------------------------------------ config

_TOP = {"protocol", "model", "quench", "betas", "beta", "subsystem", "times", "kick",
        "measure", "sources", "output", "pad"}
_MODEL = {"h", "gamma"}
_QUENCH = {"h0"}
_SUBSYSTEM = {"center", "half_widths", "left", "sizes"}
_TIMES = {"values", "rescaled", "scale"}
_KICK = {"kind", "sites", "period", "spacing", "count"}
_MEASURE = {"alphas", "beta_max", "beta_step", "n_domains", "domain_step", "fit_window"}


def _strict(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def _number(value, where: str, positive: bool = False, allow_none: bool = False):
    if value is None and allow_none:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{where}: must be positive")
    return float(value)


@dataclass
class Block:
    left: int
    right: int
    half_width: int | None = None

    @property
    def size(self) -> int:
        return self.right - self.left + 1

    @property
    def sites(self) -> range:
        return range(self.left, self.right + 1)


@dataclass
class RunConfig:
    raw: dict
    protocol: str
    model: ChainModel
    h0: float | None
    betas: list
    blocks: list
    times: dict | None
    kick: dict | None
    measure: measures.QFIConfig
    alphas: tuple
    sources: tuple
    output: Path
    pad: int

    @property
    def digest(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def times_for(self, block: Block) -> list[float]:
        spec = self.times
        if "values" in spec:
            return [float(t) for t in spec["values"]]
        length = block.half_width if spec.get("scale", "half_width") == "half_width" else block.size
        if length is None:
            length = block.size
        return [float(x) * length / self.vmax for x in spec["rescaled"]]

    @property
    def vmax(self) -> float:
        return max_velocity(self.model)


def parse_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    _strict(raw, _TOP, "config")
    protocol = raw.get("protocol")
    if protocol not in PROTOCOLS:
        raise ConfigError(f"protocol: expected one of {', '.join(PROTOCOLS)}")
    model_raw = raw.get("model", {})
    _strict(model_raw, _MODEL, "model")
    if "h" not in model_raw:
        raise ConfigError("model.h: required")
    try:
        model = ChainModel(_number(model_raw["h"], "model.h"),
                           _number(model_raw.get("gamma", 1.0), "model.gamma"))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    h0 = None
    if protocol == "global_quench":
        q = raw.get("quench")
        if q is None:
            raise ConfigError("quench: required for global_quench")
        _strict(q, _QUENCH, "quench")
        h0 = _number(q.get("h0"), "quench.h0")
    elif "quench" in raw:
        raise ConfigError("quench: only valid for global_quench")

    if protocol == "equilibrium":
        if "beta" in raw:
            raise ConfigError("beta: use 'betas' for the equilibrium protocol")
        betas = raw.get("betas", [None])
        if not isinstance(betas, list) or not betas:
            raise ConfigError("betas: expected a nonempty list (null for zero temperature)")
        betas = [_number(b, f"betas[{i}]", allow_none=True) for i, b in enumerate(betas)]
        if any(b < 0 for b in betas):
            raise ConfigError("betas: must be nonnegative")
    else:
        if "betas" in raw:
            raise ConfigError("betas: only valid for the equilibrium protocol")
        betas = [_number(raw.get("beta"), "beta", allow_none=True)]

    sub = raw.get("subsystem")
    if sub is None:
        raise ConfigError("subsystem: required")
    _strict(sub, _SUBSYSTEM, "subsystem")
    blocks = []
    if "half_widths" in sub:
        if "sizes" in sub or "left" in sub:
            raise ConfigError("subsystem: give either center/half_widths or left/sizes")
        center = int(sub.get("center", 0))
        for r in _int_list(sub["half_widths"], "subsystem.half_widths", minimum=0):
            blocks.append(Block(center - r, center + r, r))
    elif "sizes" in sub:
        if "center" in sub:
            raise ConfigError("subsystem: give either center/half_widths or left/sizes")
        left = int(sub.get("left", 0))
        for n in _int_list(sub["sizes"], "subsystem.sizes", minimum=1):
            blocks.append(Block(left, left + n - 1))
    else:
        raise ConfigError("subsystem: needs half_widths or sizes")

    times = None
    if protocol != "equilibrium":
        times = raw.get("times")
        if times is None:
            raise ConfigError("times: required")
        _strict(times, _TIMES, "times")
        if ("values" in times) == ("rescaled" in times):
            raise ConfigError("times: give exactly one of values or rescaled")
        key = "values" if "values" in times else "rescaled"
        vals = times[key]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"times.{key}: expected a nonempty list")
        vals = [_number(v, f"times.{key}[{i}]") for i, v in enumerate(vals)]
        if any(v < 0 for v in vals) or any(b < a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"times.{key}: must be nonnegative and sorted")
        if times.get("scale", "half_width") not in ("half_width", "size"):
            raise ConfigError("times.scale: expected 'half_width' or 'size'")
    elif "times" in raw:
        raise ConfigError("times: not used by the equilibrium protocol")

    kick = None
    if protocol in ("single_kick", "kick_grid", "kick_periodic"):
        kick = dict(raw.get("kick", {}))
        _strict(kick, _KICK, "kick")
        kind = kick.setdefault("kind", "spin_flip_z")
        if kind not in dynamics.KICK_KINDS:
            raise ConfigError(f"kick.kind: expected one of {', '.join(dynamics.KICK_KINDS)}")
        kick["sites"] = _int_list(kick.get("sites", [0]), "kick.sites")
        if protocol == "kick_periodic":
            kick["period"] = _number(kick.get("period"), "kick.period", positive=True) \
                if kick.get("period") is not None else None
        elif "period" in kick:
            raise ConfigError("kick.period: only valid for kick_periodic")
        if protocol == "kick_grid":
            kick["spacing"] = int(_number(kick.get("spacing"), "kick.spacing", positive=True))
            kick["count"] = int(_number(kick.get("count", 1), "kick.count", positive=True))
        elif "spacing" in kick or "count" in kick:
            raise ConfigError("kick.spacing/count: only valid for kick_grid")
    elif "kick" in raw:
        raise ConfigError("kick: only valid for kick protocols")

    meas = raw.get("measure", {})
    _strict(meas, _MEASURE, "measure")
    alphas = tuple(_number(a, "measure.alphas") for a in meas.get("alphas", [0.5, 1 / 3]))
    try:
        cfg = measures.QFIConfig(**{k: v for k, v in meas.items() if k != "alphas"})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"measure: {exc}") from exc

    default_sources = {"beyond_sc": ["beyond_sc"]}.get(protocol, ["simulation", "semiclassical"])
    sources = raw.get("sources", default_sources)
    if not isinstance(sources, list) or any(s not in SOURCES for s in sources):
        raise ConfigError(f"sources: entries must be among {', '.join(SOURCES)}")
    if protocol == "beyond_sc" and set(sources) - {"beyond_sc"}:
        raise ConfigError("sources: beyond_sc protocol only emits the beyond_sc source")
    if "oracle" in sources and max(b.size for b in blocks) > ORACLE_MAX_SITES:
        raise ConfigError(f"sources: oracle limited to subsystems of at most "
                          f"{ORACLE_MAX_SITES} sites")

    output = raw.get("output", "qfichain_out")
    if not isinstance(output, str) or not output:
        raise ConfigError("output: expected a path prefix")
    out = Path(output)
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out
    pad = int(_number(raw.get("pad", dynamics.DEFAULT_PAD), "pad", positive=True))
    return RunConfig(raw, protocol, model, h0, betas, blocks, times, kick, cfg, alphas,
                     tuple(sources), out, pad)


def _int_list(values, where: str, minimum: int | None = None) -> list[int]:
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{where}: expected a nonempty list of integers")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
            raise ConfigError(f"{where}[{i}]: expected an integer")
        if minimum is not None and v < minimum:
            raise ConfigError(f"{where}[{i}]: must be >= {minimum}")
        out.append(int(v))
    return out


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(raw, path.parent)


# ------------------------------------------------------------------ rows

def _row(cfg: RunConfig, source: str, method: str, beta: float, time: float,
         block: Block, **values) -> dict:
    row = dict.fromkeys(COLUMNS, "")
    row.update(source=source, method=method, config_hash=cfg.digest, version=__version__,
               protocol=cfg.protocol, h=cfg.model.h, gamma=cfg.model.gamma, beta=beta,
               time=time, subsystem_left=block.left, subsystem_right=block.right,
               size=block.size)
    row.update(values)
    return row


def _report_values(rep: measures.MeasureReport) -> dict:
    return dict(variance=rep.variance, I_half=rep.i_half, I_third=rep.i_third,
                qfi_over4=rep.qfi_over_4, qfi_err=rep.qfi_err, chi=rep.chi,
                lower=rep.lower_bound, upper=rep.upper_bound)


def _oracle_values(g_block, size: int) -> dict:
    rho = oracle.DenseState(size, oracle.gaussian_density(g_block))
    x = oracle.order_parameter(size, range(size))
    q = oracle.qfi_exact(rho, x)
    i_half = oracle.wydi_exact(rho, x, 0.5)
    i_third = oracle.wydi_exact(rho, x, 1 / 3)
    return dict(variance=oracle.variance_exact(rho, x), I_half=i_half, I_third=i_third,
                qfi_over4=q, qfi_err=0.0, chi=q / size ** 2, lower=i_half,
                upper=min(2 * i_half, 10 * i_half - 9 * i_third))


def _local(g, block: Block, offset: int):
    start = block.left + offset
    return gaussian.restrict(g, (2 * start, 2 * (block.right + offset + 1)))


def _measure_rows(cfg, beta, samples):
    """``samples``: list of (time, block, correlation matrix, window offset)."""
    def work(item):
        t, block, g, offset = item
        sub = _local(g, block, offset)
        rows = []
        if "simulation" in cfg.sources:
            rep = measures.measure(sub, range(block.size), cfg.measure, t, cfg.alphas)
            rows.append(_row(cfg, "simulation", "gaussian", beta, t, block,
                             **_report_values(rep)))
        if "oracle" in cfg.sources:
            rows.append(_row(cfg, "oracle", "dense", beta, t, block,
                             **_oracle_values(sub, block.size)))
        return rows

    return [r for rows in measures.ordered_map(work, samples) for r in rows]


# ------------------------------------------------------------------ protocols

def _initial_state(model: ChainModel, beta: float, window: int):
    if math.isinf(beta):
        return gaussian.ground_state_correlations(model, window)
    return gaussian.thermal_correlations(model, beta, window)


def _run_equilibrium(cfg: RunConfig) -> list[dict]:
    rows = []
    for beta in cfg.betas:
        samples = []
        for block in cfg.blocks:
            g = _initial_state(cfg.model, beta, block.size)
            samples.append((0.0, block, g, -block.left))
        rows += _measure_rows(cfg, beta, samples)
    return rows


def _kick_events(cfg: RunConfig, horizon: float) -> list[dynamics.KickEvent]:
    kind, sites = cfg.kick["kind"], cfg.kick["sites"]
    if cfg.protocol == "single_kick":
        return [dynamics.KickEvent(0.0, s, kind) for s in sites]
    if cfg.protocol == "kick_grid":
        spacing, count = cfg.kick["spacing"], cfg.kick["count"]
        pos = sorted({s + z * spacing for s in sites for z in range(-count, count + 1)})
        return [dynamics.KickEvent(0.0, p, kind) for p in pos]
    period = cfg.kick["period"]
    events = []
    for s in sites:
        events += dynamics.KickSchedule.periodic(s, period, horizon, kind).events
    return sorted(events, key=lambda e: (e.time, e.site))


def _period_for(cfg: RunConfig, block: Block) -> float:
    if cfg.kick.get("period") is not None:
        return cfg.kick["period"]
    length = block.half_width if block.half_width is not None else block.size
    return length / cfg.vmax


def _run_kicks(cfg: RunConfig) -> tuple[list[dict], list[dict]]:
    beta = cfg.betas[0]
    sim_rows, sc_rows = [], []
    sf = semiclassics.ScalingFunction.ising(cfg.model)
    kappa = ground_magnetization(cfg.model) if cfg.model.is_ising else 1.0
    for block in cfg.blocks:
        times = cfg.times_for(block)
        horizon = times[-1]
        local_cfg = cfg
        if cfg.protocol == "kick_periodic" and cfg.kick.get("period") is None:
            local_cfg = copy.copy(cfg)
            local_cfg.kick = dict(cfg.kick, period=_period_for(cfg, block))
        events = _kick_events(local_cfg, horizon)
        sites = [e.site for e in events] + [block.left, block.right]
        layout = dynamics.window_layout((min(sites), max(sites)), horizon, cfg.vmax, cfg.pad)
        g0 = _initial_state(cfg.model, beta, layout.n_sites)
        schedule = dynamics.KickSchedule(tuple(events), max(horizon, events[-1].time))
        states = dynamics.run_schedule(g0, cfg.model, schedule, times, layout, cfg.pad)
        samples = [(t, block, g, layout.offset) for t, g in zip(times, states)]
        rows = _measure_rows(cfg, beta, samples)
        sim_rows += rows
        if "semiclassical" not in cfg.sources:
            continue
        walls = []
        for e in events:
            if e.kind != "sigma_x_string":
                walls += semiclassics.kick_walls(e.kind, e.site, e.time)
        for t in times:
            if t <= 0:
                continue
            live = [w for w in walls if w.time < t]
            trace = semiclassics.semiclassical_trace_term(sf, live, (block.left, block.right),
                                                          t, kappa)
            method = "walls"
            value = semiclassics.chi_multi_kick(sf, live, (block.left, block.right), t,
                                                kappa, trace)
            sc_rows.append(_row(cfg, "semiclassical", method, beta, t, block, chi=value))
    return sim_rows, sc_rows


def _two_point_table(g, first: int, last: int) -> np.ndarray:
    sub = gaussian.restrict(g, (2 * first, 2 * (last + 1)))
    t = gaussian.two_point_rows(np.asarray(sub.data)).real
    return np.triu(t) + np.triu(t, 1).T


def _run_quench(cfg: RunConfig) -> tuple[list[dict], list[dict]]:
    pair = QuenchPair(ChainModel(cfg.h0, cfg.model.gamma), cfg.model)
    beta = cfg.betas[0]
    sim_rows, sc_rows = [], []
    for block in cfg.blocks:
        samples = []
        tables = {}
        for t in cfg.times_for(block):
            # one extra site on each side for the edge two-point functions
            g = gaussian.quench_correlations(pair, t, block.size + 2)
            samples.append((t, block, g, 1 - block.left))
            tables[t] = _two_point_table(g, 0, block.size + 1)
        sim_rows += _measure_rows(cfg, beta, samples)
        if "semiclassical" not in cfg.sources:
            continue
        for t, table in tables.items():
            try:
                value = semiclassics.quench_chi_from_correlators(table)
            except semiclassics.PredictionUndefinedError:
                value = float("nan")
            sc_rows.append(_row(cfg, "semiclassical", "correlators", beta, t, block, chi=value))
            if pair.pre.ferromagnetic and pair.post.ferromagnetic and cfg.model.is_ising and t > 0:
                asym = semiclassics.quench_chi_asymptotic(pair, block.size, t)
                sc_rows.append(_row(cfg, "semiclassical", "asymptotic", beta, t, block, chi=asym))
    return sim_rows, sc_rows


def _run_beyond(cfg: RunConfig) -> list[dict]:
    sector = beyond_sc.TwoParticleSector.ising(cfg.model)
    rows = []
    for block in cfg.blocks:
        for t in cfg.times_for(block):
            if t <= 0:
                continue
            l, r = block.left - 0.5, block.right + 0.5
            for method, diag in (("exact", False), ("semiclassical", True)):
                value = beyond_sc.chi_one_particle(sector, t, l, r, diagonal=diag)
                rows.append(_row(cfg, "beyond_sc", method, cfg.betas[0], t, block, chi=value))
    return rows


def execute(cfg: RunConfig) -> dict[str, list[dict]]:
    """Run a configuration and return rows grouped by source."""
    if cfg.protocol == "equilibrium":
        rows = _run_equilibrium(cfg)
    elif cfg.protocol == "global_quench":
        sim, sc = _run_quench(cfg)
        rows = sim + sc
    elif cfg.protocol == "beyond_sc":
        rows = _run_beyond(cfg)
    else:
        sim, sc = _run_kicks(cfg)
        rows = sim + sc
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["source"], []).append(row)
    return grouped


def _format(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# qfichain csv schema v{SCHEMA_VERSION}: {','.join(COLUMNS)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_format(row[c]) for c in COLUMNS])


def _with_log(output: Path, fn):
    output.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(f"{output}.log", mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    wlog = logging.getLogger("py.warnings")
    wlog.addHandler(handler)
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", dynamics.LightconeOverflowWarning)
            return fn()
    finally:
        logging.captureWarnings(False)
        wlog.removeHandler(handler)
        log.removeHandler(handler)
        handler.close()


def run(cfg: RunConfig, suffix: str = "") -> list[Path]:
    grouped = _with_log(cfg.output, lambda: execute(cfg))
    paths = []
    for source in SOURCES:
        if source in grouped:
            path = Path(f"{cfg.output}{suffix}_{source}.csv")
            write_csv(path, grouped[source])
            paths.append(path)
    return paths


def _set_path(raw: dict, dotted: str, value):
    keys = dotted.split(".")
    node = raw
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"sweep axis {dotted}: no such section {key}")
        node = node[key]
    leaf = keys[-1]
    if leaf not in node:
        raise ConfigError(f"sweep axis {dotted}: key not present in config")
    node[leaf] = [value] if isinstance(node[leaf], list) else value


def sweep(raw: dict, axis: str, values: list, base_dir: Path | None = None) -> list[Path]:
    if not values:
        raise ConfigError("sweep: empty value list")
    base = parse_config(raw, base_dir)
    merged: dict[str, list[dict]] = {}
    for value in values:
        variant = copy.deepcopy(raw)
        _set_path(variant, axis, value)
        cfg = parse_config(variant, base_dir)
        grouped = _with_log(base.output, lambda cfg=cfg: execute(cfg))
        for source, rows in grouped.items():
            for row in rows:
                row["axis"], row["axis_value"] = axis, value
                row["config_hash"] = base.digest
            merged.setdefault(source, []).extend(rows)
    paths = []
    for source in SOURCES:
        if source in merged:
            path = Path(f"{base.output}_sweep_{source}.csv")
            write_csv(path, merged[source])
            paths.append(path)
    return paths


def _parse_values(text: str) -> list:
    out = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        try:
            num = float(item)
        except ValueError as exc:
            raise ConfigError(f"--values: {item!r} is not a number") from exc
        out.append(int(num) if num.is_integer() and "." not in item else num)
    return out


# ------------------------------------------------------------------ validate

def validate(quick: bool = False, out=None) -> bool:
    """Gaussian path against exact diagonalization; prints max deviations."""
    out = out or sys.stdout
    sizes = (4, 6) if quick else (4, 6, 8)
    fields = (0.3, 1.2) if quick else (0.3, 0.5, 1.2)
    temps = (2.0, math.inf) if quick else (0.5, 2.0, math.inf)
    alphas = (1 / 3, 0.5, 0.5 + 0.7j)
    worst_wydi = worst_two = worst_qfi = 0.0
    for n in sizes:
        for h in fields:
            H = oracle.build_hamiltonian(n, h)
            model = ChainModel(h)
            for beta in temps:
                g = gaussian.finite_chain_correlations(model, n, beta)
                rho = oracle.thermal_state(H, beta)
                half = range(n // 2)
                red = oracle.reduce(rho, half)
                x = oracle.order_parameter(n // 2, half)
                for a in alphas:
                    diff = abs(measures.wydi(g, half, a) - oracle.wydi_exact(red, x, a))
                    worst_wydi = max(worst_wydi, diff)
                for u in range(1, n):
                    ref = rho.expect(oracle.site_operator(n, 0, "x")
                                     @ oracle.site_operator(n, u, "x")).real
                    worst_two = max(worst_two, abs(gaussian.two_point_x(g, 0, u) - ref))
                if not quick:
                    est, _, _ = measures.qfi_estimate(g, half)
                    exact = oracle.qfi_exact(red, x)
                    worst_qfi = max(worst_qfi, abs(est - exact) / max(abs(exact), 1e-12))
    ok = worst_wydi < 1e-8 and worst_two < 1e-10 and (quick or worst_qfi < 1e-4)
    print(f"max |two-point deviation|   {worst_two:.3e}", file=out)
    print(f"max |WYDI deviation|        {worst_wydi:.3e}", file=out)
    if not quick:
        print(f"max relative QFI deviation  {worst_qfi:.3e}", file=out)
    print("validate: " + ("PASS" if ok else "FAIL"), file=out)
    return ok


# ------------------------------------------------------------------ entry

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfichain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qfichain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run a configuration along one parameter axis")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, help="dotted key, e.g. model.h")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_val = sub.add_parser("validate", help="compare the Gaussian path with exact diagonalization")
    p_val.add_argument("--quick", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            for path in run(load_config(args.config)):
                print(path)
        elif args.command == "sweep":
            cfg_path = Path(args.config)
            cfg = load_config(cfg_path)
            for path in sweep(cfg.raw, args.axis, _parse_values(args.values), cfg_path.parent):
                print(path)
        else:
            return EXIT_OK if validate(args.quick) else EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
