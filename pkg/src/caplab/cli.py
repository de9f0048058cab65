"""Command-line frontend: strict config parsing, experiment orchestration,
and deterministic artifact emission (manifest.json + results.csv per run)."""

import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from . import complexity, constructions, learner
from .errors import InvalidInputError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCIENCE = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict
    seed: int
    output_dir: str


# schema: key -> (type-tag, default or REQUIRED)
_REQUIRED = object()

_COMMON = {
    "config": ("str", None),
    "out": ("str", _REQUIRED),
    "seed": ("int", 0),
}

_SCHEMAS = {
    "construct": {
        "kind": ("str", _REQUIRED),
        "m": ("int", 8),
        "eps": ("float", 0.25),
        "kappa": ("float", 0.5),
        "B": ("float", 4.0),
        "L": ("float", 4.0),
        "m_cap": ("int", 8),
        "n": ("int", 256),
        "max_resamples": ("int", 20),
    },
    "verify": {"instance": ("str", _REQUIRED)},
    "rademacher": {
        "instance": ("str", _REQUIRED),
        "draws": ("int", 100000),
        "strategy": ("str", None),
    },
    "cover": {
        "kind": ("str", _REQUIRED),
        "B": ("float", None),
        "b_x": ("float", None),
        "r": ("float", None),
        "L": ("float", None),
        "k": ("float", None),
        "c": ("float", 1.0),
        "eps_grid": ("float-list", [0.5]),
    },
    "dudley": {
        "kind": ("str", _REQUIRED),
        "B": ("float", None),
        "b_x": ("float", None),
        "r": ("float", None),
        "L": ("float", None),
        "k": ("float", None),
        "c": ("float", 1.0),
        "lb": ("float", _REQUIRED),
        "m": ("int", _REQUIRED),
        "eps_grid": ("float-list", None),
    },
    "sgd": {
        "instance": ("str", _REQUIRED),
        "T_grid": ("int-list", [100, 1000, 10000]),
        "num_seeds": ("int", 20),
        "tolerance": ("float", 0.05),
    },
    "uc-gap": {
        "instance": ("str", _REQUIRED),
        "sample_size": ("int", _REQUIRED),
        "num_seeds": ("int", 20),
    },
    "bounds": {"params": ("str", _REQUIRED)},
}


def _convert(key, tag, raw):
    try:
        if tag == "int":
            if isinstance(raw, bool) or (not isinstance(raw, (int, str))):
                raise ValueError
            return int(raw)
        if tag == "float":
            if raw is None:
                return None
            if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
                raise ValueError
            return float(raw)
        if tag == "str":
            if raw is not None and not isinstance(raw, str):
                raise ValueError
            return raw
        if tag == "float-list":
            if isinstance(raw, str):
                raw = [p for p in raw.split(",") if p]
            if not isinstance(raw, list):
                raise ValueError
            return [float(v) for v in raw]
        if tag == "int-list":
            if isinstance(raw, str):
                raw = [p for p in raw.split(",") if p]
            if not isinstance(raw, list):
                raise ValueError
            return [int(v) for v in raw]
    except (ValueError, TypeError):
        raise UsageError(f"parameter {key!r}: expected {tag}, got {raw!r}")
    raise UsageError(f"unknown schema tag {tag!r}")


def parse_config(argv):
    """argv (without program name) -> RunConfig; flag values override the
    optional --config JSON file; unknown keys are rejected."""
    if not argv:
        raise UsageError(
            "usage: caplab <command> [--key value ...]; commands: "
            + ", ".join(sorted(_SCHEMAS))
        )
    command = argv[0]
    if command not in _SCHEMAS:
        raise UsageError(
            f"unknown command {command!r}; valid: " + ", ".join(sorted(_SCHEMAS))
        )
    schema = {**_COMMON, **_SCHEMAS[command]}
    flags = {}
    i = 1
    while i < len(argv):
        tok = argv[i]
        if not tok.startswith("--"):
            raise UsageError(f"expected a --flag, got {tok!r}")
        key = tok[2:].replace("-", "_")
        if key not in schema:
            raise UsageError(
                f"unknown key {key!r} for {command}; valid keys: "
                + ", ".join(sorted(schema))
            )
        if i + 1 >= len(argv):
            raise UsageError(f"flag {tok} is missing a value")
        flags[key] = argv[i + 1]
        i += 2

    merged = {}
    cfg_path = flags.get("config")
    if cfg_path is not None:
        try:
            with open(cfg_path) as fh:
                file_vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config file {cfg_path}: {e}")
        if not isinstance(file_vals, dict):
            raise UsageError("config file must hold a JSON object")
        for key in file_vals:
            if key.replace("-", "_") not in schema:
                raise UsageError(
                    f"unknown key {key!r} in config file; valid keys: "
                    + ", ".join(sorted(schema))
                )
        merged.update({k.replace("-", "_"): v for k, v in file_vals.items()})
    merged.update(flags)

    resolved = {}
    for key, (tag, default) in schema.items():
        if key in merged:
            resolved[key] = _convert(key, tag, merged[key])
        elif default is _REQUIRED:
            raise UsageError(f"missing required parameter {key!r} for {command}")
        else:
            resolved[key] = default
    seed = resolved.pop("seed")
    out = resolved.pop("out")
    resolved.pop("config", None)
    return RunConfig(command, resolved, seed, out)


# ---------------------------------------------------------------------------
# artifact emission

def _atomic_write(path, data):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def write_results(out_dir, manifest, header, rows):
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(os.path.join(out_dir, "results.csv"), "\n".join(lines) + "\n")


def _load_instance(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"cannot read instance manifest {path}: {e}")
    if "instance" not in obj:
        raise InvalidInputError(f"{path} holds no instance record")
    return constructions.instance_from_manifest(obj["instance"])


def _base_manifest(cfg):
    return {
        "command": cfg.command,
        "parameters": cfg.parameters,
        "seed": cfg.seed,
        "threads": os.environ.get("CAPLAB_THREADS", "0"),
    }


# ---------------------------------------------------------------------------
# command handlers; each returns (exit_code)

def _run_construct(cfg):
    p = cfg.parameters
    kind = p["kind"]
    if kind == "zero-init":
        inst = constructions.zero_init_instance(
            p["B"], p["L"], p["eps"], p["m_cap"], cfg.seed,
            n=p["n"], max_resamples=p["max_resamples"])
    elif kind == "nonzero-init":
        inst = constructions.nonzero_init_instance(p["m"], p["eps"])
    elif kind == "convex":
        inst = constructions.convex_instance(p["m"], p["eps"], p["kappa"])
    else:
        raise InvalidInputError(f"unknown instance kind {kind!r}")
    manifest = _base_manifest(cfg)
    manifest["instance"] = inst.manifest()
    write_results(
        cfg.output_dir, manifest,
        ["kind", "m", "eps", "d", "n", "B", "W0_norm"],
        [[inst.kind, inst.m, inst.margin, inst.d, inst.n, inst.B,
          inst.declared_w0_norm]],
    )
    return EXIT_OK


def _run_verify(cfg):
    inst = _load_instance(cfg.parameters["instance"])
    rep = constructions.verify_shattering(inst)
    manifest = _base_manifest(cfg)
    manifest["instance"] = inst.manifest()
    write_results(
        cfg.output_dir, manifest,
        ["passed", "worst_slack", "checked_labelings", "w0_norm_ok",
         "ball_ok", "failures"],
        [[rep.passed, rep.worst_slack, rep.checked_labelings, rep.w0_norm_ok,
          rep.ball_ok, len(rep.failures)]],
    )
    return EXIT_OK if rep.passed else EXIT_SCIENCE


def _run_rademacher(cfg):
    p = cfg.parameters
    inst = _load_instance(p["instance"])
    handle = complexity.instance_class(inst)
    est = complexity.rademacher_mc(inst.points, handle, p["draws"], cfg.seed,
                                   strategy=p["strategy"])
    manifest = _base_manifest(cfg)
    manifest["instance"] = inst.manifest()
    write_results(cfg.output_dir, manifest,
                  ["id", "m", "draws", "mean", "stderr", "strategy"],
                  [est.csv_row(inst.kind)])
    return EXIT_OK


def _formula_params(p):
    out = {}
    for key in ("B", "b_x", "r", "L", "k", "c"):
        if p.get(key) is not None:
            out[key] = p[key]
    return out


def _run_cover(cfg):
    p = cfg.parameters
    rows = []
    for eps in p["eps_grid"]:
        f = complexity.CoverFormula(p["kind"], {**_formula_params(p), "eps": eps})
        rows.append([p["kind"], eps, complexity.cover_bound(f)])
    write_results(cfg.output_dir, _base_manifest(cfg),
                  ["kind", "eps", "log_cover"], rows)
    return EXIT_OK


def _run_dudley(cfg):
    p = cfg.parameters
    base = _formula_params(p)

    def log_cover(tau):
        f = complexity.CoverFormula(p["kind"], {**base, "eps": tau})
        return complexity.cover_bound(f)

    grid = p["eps_grid"]
    value = complexity.dudley_bound(
        log_cover, p["lb"], p["m"],
        grid=None if grid is None else np.asarray(grid))
    manifest = _base_manifest(cfg)
    manifest["discretization"] = {
        "panels": complexity.DUDLEY_PANELS,
        "grid": "explicit" if grid is not None
        else f"geomspace-{complexity.SCALE_GRID_SIZE}",
    }
    write_results(cfg.output_dir, manifest,
                  ["kind", "lb", "m", "bound"],
                  [[p["kind"], p["lb"], p["m"], value]])
    return EXIT_OK


def _run_sgd(cfg):
    p = cfg.parameters
    inst = _load_instance(p["instance"])
    seeds = [cfg.seed + i for i in range(p["num_seeds"])]
    table, summary = learner.excess_risk_experiment(
        inst, p["T_grid"], seeds, tolerance=p["tolerance"])
    manifest = _base_manifest(cfg)
    manifest["instance"] = inst.manifest()
    manifest["summary"] = summary
    rows = [[r["T"], r["seed"], r["excess"], r["bound"], r["passed"]]
            for r in table.rows]
    write_results(cfg.output_dir, manifest,
                  ["T", "seed", "excess", "bound", "pass"], rows)
    ok = all(s["passed"] for s in summary)
    return EXIT_OK if ok else EXIT_SCIENCE


def _run_uc_gap(cfg):
    p = cfg.parameters
    inst = _load_instance(p["instance"])
    seeds = [cfg.seed + i for i in range(p["num_seeds"])]
    table = learner.uc_gap_experiment(inst, p["sample_size"], seeds)
    manifest = _base_manifest(cfg)
    manifest["instance"] = inst.manifest()
    rows = [[r["m"], r["seed"], r["support"], r["gap"],
             bool(r["gap"] >= inst.margin)] for r in table.rows]
    write_results(cfg.output_dir, manifest,
                  ["m", "seed", "support", "gap", "pass"], rows)
    ok = all(r["gap"] >= inst.margin or r["support"] > inst.m / 2
             for r in table.rows)
    return EXIT_OK if ok else EXIT_SCIENCE


def _run_bounds(cfg):
    path = cfg.parameters["params"]
    try:
        with open(path) as fh:
            spec_list = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"cannot read parameter file {path}: {e}")
    if isinstance(spec_list, dict):
        spec_list = [spec_list]
    rows = []
    for entry in spec_list:
        if not isinstance(entry, dict) or "formula" not in entry:
            raise InvalidInputError("each entry needs a 'formula' key")
        rep = bounds_mod.evaluate(entry["formula"], entry.get("params", {}))
        rows.append([rep.formula_id, rep.value, rep.log_value, rep.notes])
    write_results(cfg.output_dir, _base_manifest(cfg),
                  ["formula", "value", "log_value", "notes"], rows)
    return EXIT_OK


_HANDLERS = {
    "construct": _run_construct,
    "verify": _run_verify,
    "rademacher": _run_rademacher,
    "cover": _run_cover,
    "dudley": _run_dudley,
    "sgd": _run_sgd,
    "uc-gap": _run_uc_gap,
    "bounds": _run_bounds,
}


def dispatch(cfg):
    threads = os.environ.get("CAPLAB_THREADS", "0")
    try:
        nthreads = int(threads)
    except ValueError:
        raise InvalidInputError("CAPLAB_THREADS must be an integer")
    if nthreads > 0:
        try:
            import numba
            numba.set_num_threads(min(nthreads, numba.config.NUMBA_NUM_THREADS))
        except ImportError:
            pass
    return _HANDLERS[cfg.command](cfg)


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = parse_config(argv)
        return dispatch(cfg)
    except (UsageError, InvalidInputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
