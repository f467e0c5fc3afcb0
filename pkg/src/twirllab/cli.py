"""Batch front-end for the experiment registry.

Subcommands:
    run     execute experiments from a JSON run config (seeded, deterministic)
    list    print the experiment catalog
    verify  run the fast invariant suites
    report  summarize previously written JSON-lines records as a table

A run config is a JSON document with an explicit version field, a mandatory
seed, and a list of experiment selections with parameter grids.  Identical
config + seed produce byte-identical record payloads (walltime excluded).
The worker count only affects wall-time: every grid point draws from its own
named substream, and all file writes go through a single writer.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .circuits import InvalidCircuitSpec, brickwork_1d
from .experiments import EXPERIMENTS

CONFIG_VERSION = 1
OUT_ENV_VAR = "TWIRLLAB_OUT"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Run configs
# ---------------------------------------------------------------------------


@dataclass
class Selection:
    experiment: str
    grid: dict  # param name -> list of values

    def points(self):
        """Cartesian product of the grid, as a list of param dicts."""
        names = list(self.grid)
        combos = iproduct(*(self.grid[k] for k in names))
        return [dict(zip(names, c)) for c in combos]


@dataclass
class RunConfig:
    version: int
    seed: int
    selections: list
    workers: int = 1
    out: str = "runs"
    fmt: str = "json"

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}") from e
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if doc.get("version") != CONFIG_VERSION:
            raise ConfigError(f"config version must be {CONFIG_VERSION}")
        if "seed" not in doc or doc["seed"] is None:
            raise ConfigError("config must carry a seed")
        seed = doc["seed"]
        if not isinstance(seed, int) or not (0 <= seed < 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        raw = doc.get("experiments")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("config needs a non-empty experiments list")
        selections = []
        for entry in raw:
            if not isinstance(entry, dict) or "id" not in entry:
                raise ConfigError("each experiment entry needs an id")
            grid = entry.get("grid", {})
            if not isinstance(grid, dict):
                raise ConfigError("grid must map parameter names to value lists")
            grid = {k: (v if isinstance(v, list) else [v]) for k, v in grid.items()}
            selections.append(Selection(entry["id"], grid))
        fmt = doc.get("format", "json")
        if fmt not in ("json", "csv", "both"):
            raise ConfigError("format must be json, csv, or both")
        return cls(
            version=doc["version"],
            seed=seed,
            selections=selections,
            workers=int(doc.get("workers", 1)),
            out=doc.get("out", "runs"),
            fmt=fmt,
        )

    def semantic_dict(self) -> dict:
        """The fields that define what gets computed (workers/out excluded)."""
        return {
            "version": self.version,
            "seed": self.seed,
            "experiments": [
                {"id": s.experiment, "grid": s.grid} for s in self.selections
            ],
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Parameter materialization
# ---------------------------------------------------------------------------


def _build_ensemble(value, n, default_group):
    """Turn a config-level ensemble value into what experiments expect.

    "haar" passes through; a dict describes a 1D brickwork:
    {"depth": d, "arity": a, "group": tag, "periodic": bool}.
    """
    if value == "haar":
        return "haar"
    if isinstance(value, dict):
        group = value.get("group", default_group)
        if group is None:
            raise ConfigError("brickwork ensemble needs a group tag")
        return brickwork_1d(
            int(n),
            int(value.get("depth", 1)),
            group,
            arity=int(value.get("arity", 2)),
            periodic=bool(value.get("periodic", False)),
        )
    raise ConfigError(f"unrecognized ensemble value {value!r}")


_GROUP_DEFAULTS = {
    "clifford4_distinguisher": "Cl",
    "orthogonal_epr_distinguisher": "O",
    "symplectic_j_distinguisher": "Sp",
    "symplectic_state_witness": "Sp",
    "matchgate_state_witness": "M",
}


def materialize_point(exp_id: str, point: dict, seed: int) -> dict:
    """Validate and convert one grid point into keyword arguments."""
    if exp_id not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment id {exp_id!r}")
    allowed = set(EXPERIMENTS[exp_id]["params"])
    extra = set(point) - allowed
    if extra:
        raise ConfigError(f"{exp_id}: unexpected parameters {sorted(extra)}")
    kwargs = dict(point)
    if "ensemble" in kwargs:
        group = kwargs.get("group", _GROUP_DEFAULTS.get(exp_id))
        kwargs["ensemble"] = _build_ensemble(
            kwargs["ensemble"], kwargs.get("n"), group
        )
    if "sites" in kwargs and kwargs["sites"] is not None:
        kwargs["sites"] = tuple(kwargs["sites"])
    kwargs["seed"] = seed
    return kwargs


def run_point(exp_id: str, point: dict, seed: int):
    kwargs = materialize_point(exp_id, point, seed)
    func = EXPERIMENTS[exp_id]["func"]
    report = func(**kwargs)
    record = report.to_record()
    # self-check assertions on every record
    if not np.isfinite(record["estimate"]):
        raise RuntimeError(f"{exp_id}: non-finite estimate")
    if record["stderr"] < 0:
        raise RuntimeError(f"{exp_id}: negative stderr")
    return record


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _payload_line(record: dict) -> str:
    """Canonical JSON for one record; walltime is excluded from the
    determinism contract but kept in the file under a separate key."""
    payload = {k: v for k, v in record.items() if k != "walltime"}
    line = {"payload": payload, "walltime": record["walltime"]}
    return json.dumps(line, sort_keys=True, separators=(",", ":"))


def _write_outputs(records_by_exp: dict, out_dir: str, fmt: str, manifest: dict):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for exp_id, records in sorted(records_by_exp.items()):
        if fmt in ("json", "both"):
            path = os.path.join(out_dir, f"{exp_id}.jsonl")
            with open(path, "w") as fh:
                for rec in records:
                    fh.write(_payload_line(rec) + "\n")
            written.append(os.path.basename(path))
        if fmt in ("csv", "both"):
            path = os.path.join(out_dir, f"{exp_id}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["experiment", "params", "estimate", "stderr",
                            "samples", "exact"])
                for rec in records:
                    w.writerow([
                        rec["experiment"],
                        json.dumps(rec["params"], sort_keys=True),
                        repr(rec["estimate"]),
                        repr(rec["stderr"]),
                        rec["samples"],
                        rec["exact"],
                    ])
            written.append(os.path.basename(path))
    manifest = dict(manifest, files=written)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _resolve_out(config: RunConfig, cli_out) -> str:
    # precedence: env var > --out flag > config file
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return env
    if cli_out:
        return cli_out
    return config.out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        config = RunConfig.from_file(args.config)
    except (OSError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
    if args.format is not None:
        config.fmt = args.format
    out_dir = _resolve_out(config, args.out)

    jobs = []  # (order index, experiment id, grid point)
    try:
        for sel in config.selections:
            if sel.experiment not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment id {sel.experiment!r}")
            for point in sel.points():
                # validate eagerly so bad combos fail before any work runs
                materialize_point(sel.experiment, point, config.seed)
                jobs.append((len(jobs), sel.experiment, point))
    except (ConfigError, InvalidCircuitSpec, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    results = [None] * len(jobs)
    failures = []

    def work(job):
        idx, exp_id, point = job
        return idx, run_point(exp_id, point, config.seed)

    workers = max(1, config.workers)
    if workers == 1:
        it = map(work, jobs)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        it = pool.map(work, jobs)
    try:
        for idx, record in it:
            results[idx] = record
    except Exception as e:  # noqa: BLE001 - report and fail the run
        print(f"error: {e}", file=sys.stderr)
        failures.append(str(e))
    finally:
        if workers > 1:
            pool.shutdown()
    if failures or any(r is None for r in results):
        return 1

    records_by_exp = {}
    for _idx, exp_id, _point in jobs:
        records_by_exp.setdefault(exp_id, [])
    for (idx, exp_id, _point), rec in zip(jobs, results):
        records_by_exp[exp_id].append(rec)
    manifest = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": config.version,
        "format": config.fmt,
        "records": len(results),
    }
    _write_outputs(records_by_exp, out_dir, config.fmt, manifest)
    print(f"wrote {len(results)} records to {out_dir} "
          f"(config hash {config.config_hash()[:12]})")
    return 0


def cmd_list(_args) -> int:
    for exp_id in sorted(EXPERIMENTS):
        entry = EXPERIMENTS[exp_id]
        params = ", ".join(entry["params"])
        print(f"{exp_id}")
        print(f"    params: {params}")
        print(f"    anchor: {entry['anchor']}")
    return 0


def _verify_checks():
    """Fast invariant suite: registry sanity, stream discipline, and a few
    exact values with known closed forms."""
    from .commutant import enumerate_pairings, enumerate_sigma_kk, pairing_gram
    from .experiments import matchgate_uniform_chi, transfer_m00
    from .operators import pinv
    from .streams import RngStream

    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))

    for exp_id, entry in EXPERIMENTS.items():
        check(f"anchor non-empty: {exp_id}", bool(entry["anchor"].strip()))
        check(f"params declared: {exp_id}", len(entry["params"]) > 0)

    check("pair pairings |B_2| = 3", len(enumerate_pairings(2)) == 3)
    check("pair pairings |B_3| = 15", len(enumerate_pairings(3)) == 15)
    check("two-copy subspaces |Sigma_22| = 2", len(enumerate_sigma_kk(2)) == 2)
    check("three-copy subspaces |Sigma_33| = 6", len(enumerate_sigma_kk(3)) == 6)

    _, g = pairing_gram(2, 4.0)
    wg = pinv(g)
    check("gram is symmetric", np.allclose(g, g.T))
    check("weingarten inverts gram on its range",
          np.allclose(g @ wg @ g, g, atol=1e-10))

    a = RngStream.named(7, "check").normal(4)
    b = RngStream.named(7, "check").normal(4)
    c = RngStream.named(8, "check").normal(4)
    check("streams are deterministic", np.array_equal(a, b))
    check("streams separate by seed", not np.array_equal(a, c))

    check("uniform matchgate value at n=1 is 2",
          abs(matchgate_uniform_chi(1, mode="exact").estimate - 2.0) < 1e-12)
    check("transfer corner entry is 5/72", float(transfer_m00(1)) == 5.0 / 72.0)
    return checks


def cmd_verify(_args) -> int:
    checks = _verify_checks()
    bad = 0
    for name, ok in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        bad += 0 if ok else 1
    print(f"{len(checks) - bad}/{len(checks)} invariant checks passed")
    return 0 if bad == 0 else 1


def cmd_report(args) -> int:
    out_dir = os.environ.get(OUT_ENV_VAR) or args.out or "runs"
    if not os.path.isdir(out_dir):
        print(f"error: no such output directory {out_dir!r}", file=sys.stderr)
        return 2
    rows = []
    for name in sorted(os.listdir(out_dir)):
        if not name.endswith(".jsonl"):
            continue
        with open(os.path.join(out_dir, name)) as fh:
            for line in fh:
                payload = json.loads(line)["payload"]
                rows.append((
                    payload["experiment"],
                    json.dumps(payload["params"], sort_keys=True),
                    payload["estimate"],
                    payload["stderr"],
                    payload["samples"],
                    "exact" if payload["exact"] else "mc",
                ))
    if not rows:
        print(f"no records found in {out_dir}")
        return 1
    widths = [max(len(str(r[i])) for r in rows) for i in range(2)]
    header = (f"{'experiment':<{widths[0]}}  {'params':<{widths[1]}}  "
              f"{'estimate':>12}  {'stderr':>10}  {'samples':>8}  kind")
    print(header)
    print("-" * len(header))
    for exp, params, est, err, samples, kind in rows:
        print(f"{exp:<{widths[0]}}  {params:<{widths[1]}}  "
              f"{est:>12.6g}  {err:>10.3g}  {samples:>8}  {kind}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twirllab",
        description="Seeded batch runner for circuit-ensemble moment experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute experiments from a run config")
    p_run.add_argument("--config", required=True, help="path to JSON run config")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed (u64)")
    p_run.add_argument("--workers", type=int, default=None,
                       help="worker count (wall-time only, never estimates)")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--format", choices=("json", "csv", "both"), default=None)
    p_run.set_defaults(func=cmd_run)

    p_list = sub.add_parser("list", help="print the experiment catalog")
    p_list.set_defaults(func=cmd_list)

    p_verify = sub.add_parser("verify", help="run the fast invariant suites")
    p_verify.set_defaults(func=cmd_verify)

    p_report = sub.add_parser("report", help="summarize JSON-lines records")
    p_report.add_argument("--out", default=None, help="directory holding records")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
