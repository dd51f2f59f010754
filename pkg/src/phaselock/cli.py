"""Command-line front end: config-driven runs with reproducible on-disk outputs.

Every verb reads a JSON config, validates it completely before touching the
output directory, and then writes its results as files. A manifest goes in
first, marked incomplete, and is rewritten with content hashes once every
output is in place, so a crashed run is recognizable from the marker alone.
Exit codes: 0 on success, 1 for anything wrong with the inputs (each problem
is reported on stderr as its own line), 2 when the numerics give out
(non-finite state, event budget). Result data lives in the output files;
stdout stays silent.

Configs are plain JSON objects. Two keys are mandatory everywhere: "version"
(currently 1) and "seed" (every run that draws anything must be seeded, and
requiring it uniformly keeps reruns byte-identical). Unknown keys are errors
at every nesting level — a typo should fail loudly, not silently fall back
to a default. Random draws inside the CLI use generators spawned from the
seed and a fixed purpose tag, so results never depend on thread count or
call order.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from .coupling import (
    TWO_PI,
    EmpiricalDelay,
    GaussianDelay,
    PointDelay,
    SineCoupling,
    TabulatedCoupling,
    UniformDelay,
    make_banded,
    read_coupling_file,
    response_from_coupling,
    wrap_angle,
)
from .dynamics import (
    DEFAULT_EVENT_CAP,
    PhaseModel,
    PulseModel,
    integrate,
    order_parameter,
    order_parameter_series,
    simulate_pulse,
    write_firings_csv,
    write_trajectory_csv,
)
from .equilibria import IsotropySpec, find_equilibrium, symmetric_equilibrium
from .errors import NumericalError, PhaselockError, ValidationError
from .experiments import (
    DELAY_MEAN_DEFAULT,
    ExperimentConfig,
    basin_mc,
    cluster_destab,
    cluster_layout,
    meanfield_compare,
    sync_probability_sweep,
    third_harmonic_coupling,
    trial_rng,
    uniform_delay_family,
)
from .graph import (
    circulant_graph,
    complete_graph,
    is_connected,
    path_graph,
    random_connected_graph,
    read_graph_file,
    ring_graph,
)
from .stability import classify, linearize, min_cut_scan, min_cut_surface, twisted_state
from ._kernels import BACKEND

VERBS = (
    "simulate",
    "pulse",
    "equilibrium",
    "stability",
    "cut-scan",
    "surface",
    "basin",
    "meanfield",
    "clusters",
    "sweep",
)

# rng purpose tags for draws made by the CLI itself (experiments spawn their
# own per-trial generators; these tags just have to be fixed and documented)
_RNG_GRAPH = 9001
_RNG_STATE = 9002
_RNG_PULSE_LAGS = 9003

# (required keys, optional keys) per block kind ------------------------------

_GRAPH_KINDS = {
    "complete": ({"n"}, set()),
    "ring": ({"n"}, set()),
    "path": ({"n"}, set()),
    "circulant": ({"n", "steps"}, set()),
    "random_connected": ({"n", "p"}, set()),
    "file": ({"path"}, set()),
}

_COUPLING_KINDS = {
    "sine": (set(), {"K"}),
    "fb": ({"b"}, {"amp"}),
    "tabulated": (set(), {"file", "values"}),
    "third_harmonic": (set(), {"a3"}),
}

_DELAY_KINDS = {
    "point": (set(), {"psi0"}),
    "uniform": ({"mu", "w"}, set()),
    "gaussian": ({"mu", "sigma"}, set()),
    "empirical": ({"samples"}, set()),
}

_STATE_KINDS = {
    "uniform": (set(), set()),
    "values": ({"values"}, set()),
    "twisted": (set(), {"winding"}),
    "symmetric": ({"m", "sizes"}, {"shifts"}),
}

_SAMPLER_KINDS = {
    "uniform": (set(), set()),
    "near": ({"state", "spread"}, set()),
}

# (required keys, optional keys) per verb; version/seed are checked separately
_VERB_SCHEMAS = {
    "simulate": (
        {"version", "seed", "graph", "coupling", "epsilon"},
        {"lags", "t_end", "h", "record_every", "phi0"},
    ),
    "pulse": (
        {"version", "seed", "graph", "coupling", "epsilon", "t_end"},
        {"omega", "delay", "delays", "theta0", "sample_dt", "event_cap"},
    ),
    "equilibrium": (
        {"version", "seed", "graph", "coupling", "epsilon"},
        {"lags", "phi0", "tol", "max_iter"},
    ),
    "stability": (
        {"version", "seed", "graph", "coupling", "epsilon", "state"},
        {"scan", "restarts"},
    ),
    "cut-scan": (
        {"version", "seed", "graph", "coupling", "epsilon", "state"},
        {"mode", "restarts"},
    ),
    "surface": (
        {"version", "seed"},
        {"graph", "coupling", "epsilon", "grid"},
    ),
    "basin": (
        {"version", "seed", "graph", "coupling", "epsilon", "trials"},
        {"t_end", "h", "sync_threshold", "sampler"},
    ),
    "meanfield": (
        {"version", "seed", "n", "trials"},
        {"coupling", "delay", "eps_total", "t_end", "h", "record_every"},
    ),
    "clusters": (
        {"version", "seed", "n", "delay"},
        {
            "coupling",
            "epsilon",
            "omega",
            "jitter",
            "tail_fraction",
            "t_end",
            "sync_threshold",
            "run_phase_model",
        },
    ),
    "sweep": (
        {"version", "seed", "n_values", "sigma_values", "trials"},
        {
            "delay_mean",
            "coupling",
            "epsilon",
            "omega",
            "jitter",
            "tail_fraction",
            "t_end",
            "sync_threshold",
            "critical_grid",
        },
    ),
}


# --- schema walk -------------------------------------------------------------


def _check_keys(prefix, block, required, optional, findings):
    """Flag unknown and missing keys of one dict level."""
    for key in sorted(set(block) - required - optional):
        findings.append("%s: unknown key '%s'" % (prefix, key))
    for key in sorted(required - set(block)):
        findings.append("%s: missing required key '%s'" % (prefix, key))


def _check_block(prefix, block, kinds, findings):
    """Check one kind-dispatched block; returns True when shape-valid."""
    if not isinstance(block, dict):
        findings.append("%s: expected an object with a 'kind' field" % prefix)
        return False
    kind = block.get("kind")
    if kind is None:
        findings.append("%s: missing required key 'kind'" % prefix)
        return False
    if kind not in kinds:
        findings.append(
            "%s: unknown kind '%s' (choices: %s)" % (prefix, kind, ", ".join(sorted(kinds)))
        )
        return False
    required, optional = kinds[kind]
    before = len(findings)
    _check_keys(prefix, block, required | {"kind"}, optional, findings)
    if prefix.endswith("sampler") and kind == "near":
        state = block.get("state")
        if state is not None:
            _check_block(prefix + ".state", state, _STATE_KINDS, findings)
    return len(findings) == before


def _check_schema(verb, cfg, findings):
    """Structural pass: required/unknown keys, version, seed, block shapes."""
    if not isinstance(cfg, dict):
        findings.append("config: expected a JSON object at the top level")
        return
    version = cfg.get("version")
    if version is None:
        findings.append("config: missing required key 'version'")
    elif version != 1:
        findings.append("version: expected 1, got %r" % (version,))
    seed = cfg.get("seed")
    if "seed" not in cfg:
        findings.append("config: missing required key 'seed' (runs must be seeded)")
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        findings.append("seed: expected a nonnegative integer, got %r" % (seed,))
    required, optional = _VERB_SCHEMAS[verb]
    for key in sorted(set(cfg) - required - optional):
        findings.append("config: unknown key '%s'" % key)
    # version and seed get their own, more specific findings above
    for key in sorted(required - {"version", "seed"} - set(cfg)):
        findings.append("config: missing required key '%s'" % key)
    block_tables = {
        "graph": _GRAPH_KINDS,
        "coupling": _COUPLING_KINDS,
        "delay": _DELAY_KINDS,
        "phi0": _STATE_KINDS,
        "theta0": _STATE_KINDS,
        "state": _STATE_KINDS,
        "sampler": _SAMPLER_KINDS,
    }
    for key, table in block_tables.items():
        if key in cfg and key in (required | optional):
            _check_block(key, cfg[key], table, findings)


# --- builders ----------------------------------------------------------------


def _build_graph(block, seed, base_dir):
    kind = block["kind"]
    if kind == "complete":
        return complete_graph(int(block["n"]))
    if kind == "ring":
        return ring_graph(int(block["n"]))
    if kind == "path":
        return path_graph(int(block["n"]))
    if kind == "circulant":
        return circulant_graph(int(block["n"]), tuple(int(s) for s in block["steps"]))
    if kind == "random_connected":
        rng = trial_rng(seed, _RNG_GRAPH)
        return random_connected_graph(int(block["n"]), float(block["p"]), rng)
    return read_graph_file(os.path.join(base_dir, block["path"]))


def _build_coupling(block, base_dir):
    if block is None:
        return SineCoupling(1.0)
    kind = block["kind"]
    if kind == "sine":
        return SineCoupling(float(block.get("K", 1.0)))
    if kind == "fb":
        return make_banded(float(block["b"]), float(block.get("amp", 1.0)))
    if kind == "third_harmonic":
        return third_harmonic_coupling(float(block.get("a3", -0.32)))
    # tabulated: inline samples or a file on the uniform grid
    if ("file" in block) == ("values" in block):
        raise ValidationError("coupling: tabulated needs exactly one of 'file', 'values'")
    if "file" in block:
        return read_coupling_file(os.path.join(base_dir, block["file"]))
    return TabulatedCoupling(np.asarray(block["values"], dtype=float))


def _build_delay(block):
    kind = block["kind"]
    if kind == "point":
        return PointDelay(float(block.get("psi0", 0.0)))
    if kind == "uniform":
        return UniformDelay(float(block["mu"]), float(block["w"]))
    if kind == "gaussian":
        return GaussianDelay(float(block["mu"]), float(block["sigma"]))
    return EmpiricalDelay(np.asarray(block["samples"], dtype=float))


def _build_state(block, n, rng):
    """Phase vector from a state block; 'uniform' draws from ``rng``."""
    if block is None or block["kind"] == "uniform":
        return rng.uniform(0.0, TWO_PI, n)
    kind = block["kind"]
    if kind == "values":
        phi = np.asarray(block["values"], dtype=float)
        if phi.shape != (n,):
            raise ValidationError(
                "state values have length %d, the graph has %d vertices" % (phi.size, n)
            )
        return phi
    if kind == "twisted":
        return twisted_state(n, int(block.get("winding", 1)))
    spec = IsotropySpec(
        int(block["m"]),
        tuple(int(k) for k in block["sizes"]),
        tuple(float(d) for d in block["shifts"]) if "shifts" in block else None,
    )
    if spec.n != n:
        raise ValidationError(
            "symmetric state has %d oscillators, the graph has %d" % (spec.n, n)
        )
    return np.asarray(symmetric_equilibrium(spec))


def _positive(cfg, key, findings, strict=True, default=None):
    """Numeric sanity for a scalar config entry; returns the value or default."""
    if key not in cfg:
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        findings.append("%s: expected a number, got %r" % (key, value))
        return default
    if strict and not value > 0:
        findings.append("%s: must be > 0, got %r" % (key, value))
        return default
    if not strict and value < 0:
        findings.append("%s: must be >= 0, got %r" % (key, value))
        return default
    return float(value)


# --- semantic validation (shared by validate and run) -------------------------


def _prepare(verb, cfg, base_dir, findings):
    """Build every object the run needs, collecting problems as findings.

    Returns a plan dict (possibly partial when findings were appended); the
    run proceeds only when the findings list stays empty, so a partial plan
    is never executed.
    """
    plan = {"seed": cfg.get("seed", 0)}
    seed = plan["seed"] if isinstance(plan["seed"], int) and plan["seed"] >= 0 else 0

    graph = None
    if "graph" in cfg and isinstance(cfg["graph"], dict) and "kind" in cfg["graph"]:
        try:
            graph = _build_graph(cfg["graph"], seed, base_dir)
        except (PhaselockError, ValueError, OSError) as exc:
            findings.append("graph: %s" % exc)
    plan["graph"] = graph

    coupling = None
    if "coupling" not in cfg or (
        isinstance(cfg.get("coupling"), dict) and "kind" in cfg["coupling"]
    ):
        try:
            coupling = _build_coupling(cfg.get("coupling"), base_dir)
        except (PhaselockError, ValueError, OSError) as exc:
            findings.append("coupling: %s" % exc)
    plan["coupling"] = coupling

    if "delay" in cfg and isinstance(cfg["delay"], dict) and "kind" in cfg["delay"]:
        try:
            plan["delay"] = _build_delay(cfg["delay"])
        except (PhaselockError, ValueError) as exc:
            findings.append("delay: %s" % exc)

    if "lags" in cfg and graph is not None:
        lags = cfg["lags"]
        if isinstance(lags, (int, float)) and not isinstance(lags, bool):
            lags = [float(lags)] * graph.n_edges
        try:
            PhaseModel(graph, SineCoupling(1.0), 1.0, lags=lags)
        except (PhaselockError, ValueError) as exc:
            findings.append("lags: %s" % exc)
        else:
            plan["lags"] = lags

    plan["epsilon"] = _positive(cfg, "epsilon", findings)
    plan["t_end"] = _positive(cfg, "t_end", findings)
    plan["h"] = _positive(cfg, "h", findings)
    plan["omega"] = _positive(cfg, "omega", findings, default=TWO_PI)
    plan["eps_total"] = _positive(cfg, "eps_total", findings, default=0.5)
    plan["sample_dt"] = _positive(cfg, "sample_dt", findings)
    plan["tol"] = _positive(cfg, "tol", findings, default=1e-12)
    plan["jitter"] = _positive(cfg, "jitter", findings, strict=False, default=0.01)
    plan["sync_threshold"] = _positive(cfg, "sync_threshold", findings, default=0.99)
    plan["tail_fraction"] = _positive(cfg, "tail_fraction", findings, default=0.1)
    plan["delay_mean"] = _positive(cfg, "delay_mean", findings, default=DELAY_MEAN_DEFAULT)
    for key, default, low in (
        ("trials", None, 1),
        ("record_every", 1, 1),
        ("max_iter", 200, 1),
        ("event_cap", DEFAULT_EVENT_CAP, 1),
        ("grid", 41, 2),
        ("critical_grid", 141, 2),
    ):
        value = cfg.get(key, default)
        if value is not None and (
            isinstance(value, bool) or not isinstance(value, int) or value < low
        ):
            findings.append("%s: expected an integer >= %d, got %r" % (key, low, value))
            value = default
        plan[key] = value
    if plan["sync_threshold"] is not None and plan["sync_threshold"] > 1.0:
        findings.append("sync_threshold: must lie in (0, 1]")
    if plan["tail_fraction"] is not None and plan["tail_fraction"] > 1.0:
        findings.append("tail_fraction: must lie in (0, 1]")

    # state blocks (need the graph for the length)
    state_key = {"pulse": "theta0", "stability": "state", "cut-scan": "state"}.get(
        verb, "phi0"
    )
    if graph is not None:
        block = cfg.get(state_key)
        if block is None or (isinstance(block, dict) and "kind" in block):
            try:
                plan["state"] = _build_state(block, graph.n, trial_rng(seed, _RNG_STATE))
            except (PhaselockError, ValueError) as exc:
                findings.append("%s: %s" % (state_key, exc))

    # verb-specific checks
    if verb in ("stability", "cut-scan", "basin") and graph is not None:
        if not is_connected(graph):
            findings.append(
                "graph: not connected — the cut criterion and the basin experiment "
                "need a connected graph"
            )
    if verb in ("stability", "cut-scan") and graph is not None:
        mode = cfg.get("scan" if verb == "stability" else "mode", "exhaustive")
        if mode not in ("exhaustive", "heuristic"):
            findings.append("scan mode: must be 'exhaustive' or 'heuristic', got %r" % mode)
        elif mode == "exhaustive" and graph.n > 25:
            findings.append(
                "graph: %d vertices is too many for the exhaustive scan (max 25); "
                "set the mode to 'heuristic'" % graph.n
            )
        plan["mode"] = mode
    if verb == "surface":
        if graph is None and "graph" not in cfg:
            plan["graph"] = circulant_graph(6, (1, 2))
        elif graph is not None and graph.n != 6:
            findings.append("graph: the twist-family surface needs exactly 6 vertices")
        if plan["epsilon"] is None:
            plan["epsilon"] = 1.0
    if verb == "pulse":
        if "delay" in cfg and "delays" in cfg:
            findings.append("pulse: give either a delay law or explicit 'delays', not both")
        if "delays" in cfg and graph is not None:
            arr = np.asarray(cfg["delays"], dtype=float)
            if arr.shape != (graph.n_edges,):
                findings.append(
                    "delays: expected one phase lag per edge (%d), got shape %s"
                    % (graph.n_edges, arr.shape)
                )
            elif np.any(arr < 0) or not np.all(np.isfinite(arr)):
                findings.append("delays: must be finite and >= 0")
            else:
                plan["explicit_lags"] = arr
    if verb == "meanfield":
        n = cfg.get("n")
        n_list = n if isinstance(n, list) else [n]
        if not n_list or any(
            isinstance(v, bool) or not isinstance(v, int) or v < 2 for v in n_list
        ):
            findings.append("n: expected an integer >= 2 or a list of them, got %r" % (n,))
        else:
            plan["n_list"] = [int(v) for v in n_list]
    if verb == "clusters":
        n = cfg.get("n")
        if isinstance(n, bool) or not isinstance(n, int):
            findings.append("n: expected an integer, got %r" % (n,))
        else:
            try:
                cluster_layout(n)
            except PhaselockError as exc:
                findings.append("n: %s" % exc)
            else:
                plan["n"] = n
        if "delay" not in cfg:
            pass  # already a missing-key finding from the schema pass
    if verb == "sweep":
        n_values = cfg.get("n_values")
        if (
            not isinstance(n_values, list)
            or not n_values
            or any(isinstance(v, bool) or not isinstance(v, int) for v in n_values)
        ):
            findings.append("n_values: expected a non-empty list of integers")
        else:
            for v in n_values:
                try:
                    cluster_layout(v)
                except PhaselockError as exc:
                    findings.append("n_values: %s" % exc)
            plan["n_values"] = [int(v) for v in n_values]
        sig = cfg.get("sigma_values")
        if (
            not isinstance(sig, list)
            or not sig
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in sig)
        ):
            findings.append("sigma_values: expected a non-empty list of numbers")
        else:
            mu = plan["delay_mean"] or DELAY_MEAN_DEFAULT
            cap = mu / math.sqrt(3.0)
            for v in sig:
                if v < 0:
                    findings.append("sigma_values: spreads must be >= 0, got %r" % (v,))
                elif v > cap + 1e-12:
                    findings.append(
                        "sigma_values: %g exceeds mu/sqrt(3) = %.4g — the uniform "
                        "delay law's support would go negative" % (v, cap)
                    )
            plan["sigma_values"] = [float(v) for v in sig]
    return plan


def validate(verb, cfg, base_dir="."):
    """All problems with a config, as human-readable strings; empty = runnable."""
    if verb not in _VERB_SCHEMAS:
        return ["verb: unknown verb '%s' (choices: %s)" % (verb, ", ".join(VERBS))]
    findings = []
    _check_schema(verb, cfg, findings)
    if not isinstance(cfg, dict):
        return findings
    _prepare(verb, cfg, base_dir, findings)
    # deduplicate while keeping order: schema and prepare can flag the same key
    seen = set()
    out = []
    for item in findings:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def validate_file(verb, path):
    """Load a config file and validate it; unreadable files are findings too."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        return ["config: %s" % exc], None
    except json.JSONDecodeError as exc:
        return ["config: not valid JSON — %s" % exc], None
    return validate(verb, cfg, os.path.dirname(os.path.abspath(path))), cfg


# --- output helpers -----------------------------------------------------------


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def _write_manifest(outdir, verb, cfg, status, outputs):
    names = sorted(outputs)
    manifest = {
        "verb": verb,
        "config": cfg,
        "backend": BACKEND,
        "status": status,
        "outputs": {name: _sha256(os.path.join(outdir, name)) for name in names},
    }
    _write_json(os.path.join(outdir, "manifest.json"), manifest)


def _write_rows_csv(path, header, columns):
    """Plain CSV: floats at 17 significant digits, ints as ints."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(
                ",".join(
                    "%d" % x if isinstance(x, (int, np.integer)) else "%.17g" % x
                    for x in row
                )
                + "\n"
            )


# --- verb runners -------------------------------------------------------------


def _run_simulate(cfg, plan, outdir, threads):
    model = PhaseModel(
        plan["graph"], plan["coupling"], plan["epsilon"], lags=plan.get("lags")
    )
    traj = integrate(
        model,
        plan["state"],
        h=plan["h"],
        t_end=plan["t_end"],
        record_every=plan["record_every"],
    )
    write_trajectory_csv(os.path.join(outdir, "trajectory.csv"), traj)
    r, _ = order_parameter(traj.states[-1])
    _write_json(
        os.path.join(outdir, "summary.json"),
        {
            "n": model.graph.n,
            "n_edges": model.graph.n_edges,
            "rows": int(traj.times.shape[0]),
            "t_final": float(traj.times[-1]),
            "final_r": float(r),
            "potential_form": model.is_potential_form(),
        },
    )
    return ["trajectory.csv", "summary.json"]


def _run_pulse(cfg, plan, outdir, threads):
    g = plan["graph"]
    omega = plan["omega"]
    response = response_from_coupling(plan["coupling"], omega)
    if "explicit_lags" in plan:
        psi = plan["explicit_lags"]
    elif "delay" in plan:
        psi = plan["delay"].sample(trial_rng(plan["seed"], _RNG_PULSE_LAGS), g.n_edges)
    else:
        psi = np.zeros(g.n_edges)
    model = PulseModel(g, response, plan["epsilon"], delays=psi / omega, omega=omega)
    traj, fire_t, fire_osc = simulate_pulse(
        model,
        wrap_angle(plan["state"]),
        plan["t_end"],
        sample_dt=plan["sample_dt"],
        event_cap=plan["event_cap"],
    )
    write_trajectory_csv(os.path.join(outdir, "samples.csv"), traj)
    write_firings_csv(os.path.join(outdir, "firings.csv"), fire_t, fire_osc)
    r = order_parameter_series(traj.states)
    _write_json(
        os.path.join(outdir, "summary.json"),
        {
            "n": g.n,
            "n_edges": g.n_edges,
            "firings": int(len(fire_t)),
            "rows": int(traj.times.shape[0]),
            "final_r": float(r[-1]),
        },
    )
    return ["samples.csv", "firings.csv", "summary.json"]


def _run_equilibrium(cfg, plan, outdir, threads):
    model = PhaseModel(
        plan["graph"], plan["coupling"], plan["epsilon"], lags=plan.get("lags")
    )
    report = find_equilibrium(
        model, plan["state"], tol=plan["tol"], max_iter=plan["max_iter"]
    )
    with open(os.path.join(outdir, "equilibrium.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    return ["equilibrium.json"]


def _run_stability(cfg, plan, outdir, threads):
    model = PhaseModel(plan["graph"], plan["coupling"], plan["epsilon"])
    lin = linearize(model, plan["state"])
    verdict = classify(lin)
    part, value = min_cut_scan(
        lin, mode=plan["mode"], restarts=int(cfg.get("restarts", 32)), seed=plan["seed"]
    )
    _write_json(
        os.path.join(outdir, "verdict.json"),
        {
            "verdict": verdict.verdict,
            "max_nonflow_eigenvalue": verdict.max_nonflow_eigenvalue,
            "eigenvalues": [float(x) for x in verdict.eigenvalues],
            "min_cut": {
                "cut_value": float(value),
                "plus_side": list(part.plus),
                "mode": plan["mode"],
            },
            "certified_unstable": bool(value < 0),
        },
    )
    return ["verdict.json"]


def _run_cut_scan(cfg, plan, outdir, threads):
    model = PhaseModel(plan["graph"], plan["coupling"], plan["epsilon"])
    lin = linearize(model, plan["state"])
    part, value = min_cut_scan(
        lin, mode=plan["mode"], restarts=int(cfg.get("restarts", 32)), seed=plan["seed"]
    )
    n = model.graph.n
    payload = {
        "cut_value": float(value),
        "plus_side": list(part.plus),
        "mode": plan["mode"],
        "certified_unstable": bool(value < 0),
    }
    if plan["mode"] == "exhaustive":
        payload["partitions_scanned"] = (1 << (n - 1)) - 1
    else:
        payload["restarts"] = int(cfg.get("restarts", 32))
    _write_json(os.path.join(outdir, "cutscan.json"), payload)
    return ["cutscan.json"]


def _run_surface(cfg, plan, outdir, threads):
    model = PhaseModel(plan["graph"], plan["coupling"], plan["epsilon"])
    lams, values = min_cut_surface(model, grid=plan["grid"], threads=threads)
    k = lams.size
    lam1 = np.repeat(lams, k)
    lam2 = np.tile(lams, k)
    _write_rows_csv(
        os.path.join(outdir, "surface.csv"),
        ["lam1", "lam2", "min_cut"],
        [lam1, lam2, values.reshape(-1)],
    )
    _write_json(
        os.path.join(outdir, "summary.json"),
        {
            "grid": int(k),
            "rows": int(k * k),
            "max_min_cut": float(np.max(values)),
            "all_negative": bool(np.all(values < 0)),
        },
    )
    return ["surface.csv", "summary.json"]


def _experiment_config(plan, threads):
    return ExperimentConfig(
        seed=plan["seed"],
        trials=plan["trials"] if plan["trials"] else 1,
        t_end=plan["t_end"],
        h=plan["h"],
        sync_threshold=plan["sync_threshold"],
        threads=threads,
    )


def _run_basin(cfg, plan, outdir, threads):
    sampler = None
    block = cfg.get("sampler")
    if block is not None and block.get("kind") == "near":
        base = _build_state(block["state"], plan["graph"].n, trial_rng(plan["seed"], _RNG_STATE))
        spread = float(block["spread"])

        def sampler(rng):
            return wrap_angle(base + spread * rng.uniform(-1.0, 1.0, base.shape[0]))

    report = basin_mc(
        plan["graph"],
        plan["coupling"],
        plan["epsilon"],
        _experiment_config(plan, threads),
        sampler=sampler,
    )
    _write_rows_csv(
        os.path.join(outdir, "basin.csv"),
        ["trial", "synced", "final_r", "stop_t"],
        [
            np.arange(report.synced.shape[0]),
            report.synced.astype(np.int64),
            report.final_r,
            report.stop_times,
        ],
    )
    _write_json(
        os.path.join(outdir, "summary.json"),
        {
            "fraction": report.fraction,
            "trials": int(report.synced.shape[0]),
            "synced": int(np.sum(report.synced)),
        },
    )
    return ["basin.csv", "summary.json"]


def _run_meanfield(cfg, plan, outdir, threads):
    written = []
    summary = {"n": plan["n_list"], "median_sup_distance": {}, "final_r": {}}
    for n in plan["n_list"]:
        report = meanfield_compare(
            n,
            _experiment_config(plan, threads),
            coupling=plan["coupling"] if "coupling" in cfg else None,
            delay=plan.get("delay"),
            eps_total=plan["eps_total"],
            record_every=plan["record_every"],
        )
        trials, rows = report.r_pairwise.shape
        name = "meanfield_N%d.csv" % n
        _write_rows_csv(
            os.path.join(outdir, name),
            ["trial", "t", "r_pairwise", "r_effective"],
            [
                np.repeat(np.arange(trials), rows),
                np.tile(report.times, trials),
                report.r_pairwise.reshape(-1),
                report.r_effective.reshape(-1),
            ],
        )
        written.append(name)
        summary["median_sup_distance"][str(n)] = report.median_sup_distance
        summary["final_r"][str(n)] = {
            "pairwise_median": float(np.median(report.r_pairwise[:, -1])),
            "effective_median": float(np.median(report.r_effective[:, -1])),
        }
    _write_json(os.path.join(outdir, "summary.json"), summary)
    written.append("summary.json")
    return written


def _run_clusters(cfg, plan, outdir, threads):
    report = cluster_destab(
        plan["n"],
        plan["delay"],
        _experiment_config(plan, threads),
        coupling=plan["coupling"] if "coupling" in cfg else None,
        epsilon=plan["epsilon"] if plan["epsilon"] is not None else 4e-3,
        omega=plan["omega"],
        jitter=plan["jitter"],
        tail_fraction=plan["tail_fraction"],
        run_phase_model=bool(cfg.get("run_phase_model", True)),
    )
    _write_rows_csv(
        os.path.join(outdir, "clusters_pulse.csv"), ["t", "r"], [report.times, report.r]
    )
    _write_rows_csv(
        os.path.join(outdir, "clusters_phase.csv"),
        ["t", "r"],
        [report.phase_times, report.phase_r],
    )
    _write_json(
        os.path.join(outdir, "outcome.json"),
        {
            "outcome": report.outcome,
            "tail_min_r": report.tail_min_r,
            "verdict": report.verdict,
            "slopes": list(report.slopes),
            "agrees": report.agrees(),
            "n": report.n,
        },
    )
    return ["clusters_pulse.csv", "clusters_phase.csv", "outcome.json"]


def _run_sweep(cfg, plan, outdir, threads):
    report = sync_probability_sweep(
        plan["n_values"],
        plan["sigma_values"],
        _experiment_config(plan, threads),
        coupling=plan["coupling"] if "coupling" in cfg else None,
        delay_family=uniform_delay_family(plan["delay_mean"]),
        epsilon=plan["epsilon"] if plan["epsilon"] is not None else 4e-3,
        omega=plan["omega"],
        jitter=plan["jitter"],
        tail_fraction=plan["tail_fraction"],
        critical_grid=plan["critical_grid"],
    )
    k_n = len(report.n_values)
    k_s = report.sigma_values.shape[0]
    _write_rows_csv(
        os.path.join(outdir, "sweep.csv"),
        ["n", "sigma", "prob"],
        [
            np.repeat(np.asarray(report.n_values, dtype=np.int64), k_s),
            np.tile(report.sigma_values, k_n),
            report.probs.reshape(-1),
        ],
    )
    _write_json(
        os.path.join(outdir, "sweep.json"),
        {
            "n_values": list(report.n_values),
            "sigma_values": [float(s) for s in report.sigma_values],
            "trials": report.trials,
            "sigma_star": [s for s in report.sigma_star],
            "crossing": {
                str(n): report.crossing(i) for i, n in enumerate(report.n_values)
            },
        },
    )
    return ["sweep.csv", "sweep.json"]


_RUNNERS = {
    "simulate": _run_simulate,
    "pulse": _run_pulse,
    "equilibrium": _run_equilibrium,
    "stability": _run_stability,
    "cut-scan": _run_cut_scan,
    "surface": _run_surface,
    "basin": _run_basin,
    "meanfield": _run_meanfield,
    "clusters": _run_clusters,
    "sweep": _run_sweep,
}


# --- entry point ---------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse normally exits with status 2; keep 2 reserved for numerics
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(
        prog="phaselock",
        description="Simulate coupled oscillator networks and certify "
        "(in)stability of phase-locked states from a JSON config.",
    )
    parser.add_argument("verb", choices=VERBS, help="what to run")
    parser.add_argument("config", help="JSON config file")
    parser.add_argument(
        "--output-dir", default="results", help="directory for result files"
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads for trial batches (results never depend on this)",
    )
    parser.add_argument(
        "--validate-only",
        action="store_true",
        help="report config findings and exit without running",
    )
    parser.add_argument(
        "--grid", type=int, default=None, help="surface only: mesh points per axis"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (dotted path, JSON value), e.g. "
        "--set coupling.b=0.8 --set trials=10",
    )
    return parser


def _apply_override(cfg, item):
    if "=" not in item:
        raise _UsageError("--set expects KEY=VALUE, got %r" % item)
    path, raw = item.split("=", 1)
    keys = path.split(".")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings are convenient: --set coupling.kind=sine
    node = cfg
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def run(argv=None):
    """Parse arguments, run one verb, return the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print("phaselock: %s" % exc, file=sys.stderr)
        return 1

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print("phaselock: config: %s" % exc, file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print("phaselock: config: not valid JSON — %s" % exc, file=sys.stderr)
        return 1

    if isinstance(cfg, dict):
        try:
            for item in args.overrides:
                _apply_override(cfg, item)
        except _UsageError as exc:
            print("phaselock: %s" % exc, file=sys.stderr)
            return 1
        if args.verb == "surface" and args.grid is not None:
            cfg["grid"] = args.grid
    if args.grid is not None and args.verb != "surface":
        print("phaselock: the --grid flag applies to the surface verb only", file=sys.stderr)
        return 1
    if args.threads < 1:
        print("phaselock: --threads must be >= 1", file=sys.stderr)
        return 1

    base_dir = os.path.dirname(os.path.abspath(args.config))
    findings = validate(args.verb, cfg, base_dir)
    if args.validate_only:
        for line in findings:
            print(line, file=sys.stderr)
        return 1 if findings else 0
    if findings:
        for line in findings:
            print(line, file=sys.stderr)
        print(
            "phaselock: config failed validation (%d finding%s)"
            % (len(findings), "" if len(findings) == 1 else "s"),
            file=sys.stderr,
        )
        return 1

    plan = _prepare(args.verb, cfg, base_dir, [])
    outdir = args.output_dir
    try:
        os.makedirs(outdir, exist_ok=True)
        _write_manifest(outdir, args.verb, cfg, "incomplete", [])
    except OSError as exc:
        print("phaselock: output: %s" % exc, file=sys.stderr)
        return 1

    try:
        written = _RUNNERS[args.verb](cfg, plan, outdir, args.threads)
    except NumericalError as exc:
        print("phaselock: numerics: %s" % exc, file=sys.stderr)
        return 2
    except PhaselockError as exc:
        print("phaselock: %s" % exc, file=sys.stderr)
        return 1

    _write_manifest(outdir, args.verb, cfg, "complete", written)
    print("phaselock: wrote %s" % ", ".join(written + ["manifest.json"]), file=sys.stderr)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
