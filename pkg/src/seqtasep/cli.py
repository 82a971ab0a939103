"""Command-line front end.

Subcommands::

    simulate     Monte Carlo positions          CSV run_id,particle_index,position
    exact        joint distribution (JSON; CSV with --batch)
    airy1        Airy_1 joint distribution      JSON
    f1-table     one-point Airy_1 law           CSV s,F1_2s
    converge     finite t versus limit          CSV t,s,finite_cdf,airy1_cdf,diff
                 (--kernel: CSV t,r1,s1,r2,s2,err)
    kernel-eval  one kernel entry               JSON
    selftest     invariant checks, pass/fail table

Every option can also come from a JSON file given with ``--config``; flags on
the command line win. Exit codes: 0 success, 1 failed selftest, 2 invalid
input, 3 numerical non-convergence. The environment variable
``AIRY1_THREADS`` overrides ``--threads``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import NonConvergence, TasepError

log = logging.getLogger("seqtasep")

SCHEMAS = {
    "simulate": ["run_id", "particle_index", "position"],
    "converge": ["t", "s", "finite_cdf", "airy1_cdf", "diff"],
    "kernel-error": ["t", "r1", "s1", "r2", "s2", "err"],
    "f1-table": ["s", "F1_2s"],
    "exact-batch": ["row", "probability"],
}

# option defaults; None means "required for the subcommands that use it"
DEFAULTS = {
    "p": None,
    "d": None,
    "t": None,
    "N": None,
    "samples": 1000,
    "seed": 0,
    "observe": None,
    "threads": 1,
    "ghosts": None,
    "indices": None,
    "thresholds": None,
    "convention": "geq",
    "system": "full",
    "tol": None,
    "batch": None,
    "times": None,
    "levels": None,
    "n_q": 60,
    "cutoff": 14.0,
    "s_min": -3.0,
    "s_max": 2.0,
    "s_step": 0.5,
    "ts": "500,1000,2000",
    "kernel": False,
    "r1": 0.0,
    "r2": 0.0,
    "s1": None,
    "s2": None,
    "n1": None,
    "x1": None,
    "n2": None,
    "x2": None,
    "method": "auto",
    "conjugate": False,
    "centered": False,
    "krawtchouk": False,
    "out": None,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    return str(v)


def emit_csv(records, schema, path=None) -> None:
    """Write a header row and one row per record.

    Parameters
    ----------
    records : iterable of sequence or mapping
        Rows; mappings are read in ``schema`` order.
    schema : sequence of str
        Column names.
    path : str or None
        Output file; standard output when ``None``.

    Notes
    -----
    Floats are written with 12 significant digits so that repeated runs give
    byte-identical files.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(schema))
    for rec in records:
        row = [rec[c] for c in schema] if isinstance(rec, dict) else list(rec)
        if len(row) != len(schema):
            raise ConfigError(f"record {row!r} does not match schema {list(schema)}")
        w.writerow([_fmt(v) for v in row])
    _write(buf.getvalue(), path)


def _round12(obj):
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float("%.12g" % float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit_json(obj, path=None) -> None:
    _write(json.dumps(_round12(obj), sort_keys=True, indent=2) + "\n", path)


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# configuration


def _int_list(s):
    if s is None:
        return None
    if isinstance(s, (list, tuple)):
        return [int(v) for v in s]
    return [int(v) for v in str(s).split(",") if v.strip()]


def _float_list(s):
    if s is None:
        return None
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).split(",") if v.strip()]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqtasep", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"seqtasep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--tol", type=float)
        if model:
            sp.add_argument("--p", type=float)
            sp.add_argument("--d", type=int)
            sp.add_argument("--t", type=int)

    sp = sub.add_parser("simulate", help="Monte Carlo particle positions")
    common(sp)
    sp.add_argument("--N", type=int, help="labelled particles (default: max observed)")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--observe", help="comma-separated labels")
    sp.add_argument("--ghosts", type=int, help="particles right of label 1 (default: exact dZ truncation)")

    sp = sub.add_parser("exact", help="joint distribution by Fredholm determinant")
    common(sp)
    sp.add_argument("--indices")
    sp.add_argument("--thresholds")
    sp.add_argument("--convention", choices=["geq", "leq"])
    sp.add_argument("--system", choices=["full", "half"])
    sp.add_argument("--batch", help="CSV of threshold tuples, one per row (header optional)")

    sp = sub.add_parser("airy1", help="Airy_1 joint distribution")
    common(sp, model=False)
    sp.add_argument("--times")
    sp.add_argument("--levels")
    sp.add_argument("--n-q", "--nodes", dest="n_q", type=int)
    sp.add_argument("--cutoff", type=float, help="quadrature interval length")

    sp = sub.add_parser("f1-table", help="table of P(A1(0) <= s)")
    common(sp, model=False)
    sp.add_argument("--s-min", dest="s_min", type=float)
    sp.add_argument("--s-max", dest="s_max", type=float)
    sp.add_argument("--s-step", dest="s_step", type=float)
    sp.add_argument("--n-q", dest="n_q", type=int)

    sp = sub.add_parser("converge", help="finite-time law versus the Airy_1 limit")
    common(sp)
    sp.add_argument("--ts", help="comma-separated times")
    sp.add_argument("--s-min", dest="s_min", type=float)
    sp.add_argument("--s-max", dest="s_max", type=float)
    sp.add_argument("--s-step", dest="s_step", type=float)
    sp.add_argument("--centered", action="store_const", const=True, help="remove the deterministic lattice offset")
    sp.add_argument("--kernel", action="store_const", const=True, help="report kernel errors instead")
    sp.add_argument("--r1", type=float)
    sp.add_argument("--r2", type=float)
    sp.add_argument("--s1", type=float)
    sp.add_argument("--s2", type=float)

    sp = sub.add_parser("kernel-eval", help="one kernel entry")
    common(sp)
    for name in ("n1", "x1", "n2", "x2"):
        sp.add_argument(f"--{name}", type=int)
    sp.add_argument("--method", choices=["auto", "d2", "roots"])
    sp.add_argument("--conjugate", action="store_const", const=True)
    sp.add_argument("--system", choices=["full", "half"])

    sp = sub.add_parser("selftest", help="run invariant checks")
    common(sp, model=False)
    sp.add_argument("--krawtchouk", action="store_const", const=True, help="also run the Krawtchouk grid")
    return ap


def resolve_config(argv):
    """Parse ``argv`` and merge with ``--config``: defaults < file < flags."""
    ns = _build_parser().parse_args(argv)
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                filecfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if "nodes" in filecfg:
            filecfg["n_q"] = filecfg.pop("nodes")
        unknown = set(filecfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(filecfg)
    for k, v in vars(ns).items():
        if k not in ("config", "command") and v is not None:
            cfg[k] = v
    env = os.environ.get("AIRY1_THREADS")
    if env:
        try:
            cfg["threads"] = int(env)
        except ValueError as exc:
            raise ConfigError(f"AIRY1_THREADS must be an integer, got {env!r}") from exc
    if int(cfg["threads"]) < 1:
        raise ConfigError("threads must be >= 1")
    cfg["command"] = ns.command
    return cfg


def config_digest(cfg) -> str:
    """Short SHA-256 of the resolved configuration (thread count excluded)."""
    stable = {k: v for k, v in cfg.items() if k not in ("threads", "out")}
    blob = json.dumps(stable, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _need(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _params(cfg):
    from .model import ModelParams

    _need(cfg, "p", "d", "t")
    return ModelParams(float(cfg["p"]), int(cfg["d"]), int(cfg["t"]))


def _s_grid(cfg):
    lo, hi, h = float(cfg["s_min"]), float(cfg["s_max"]), float(cfg["s_step"])
    if not h > 0 or hi < lo:
        raise ConfigError("need s_step > 0 and s_max >= s_min")
    n = int(math.floor((hi - lo) / h + 1e-9))
    return [lo + i * h for i in range(n + 1)]


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg):
    from .simulator import simulate_batch

    params = _params(cfg)
    _need(cfg, "observe")
    observe = _int_list(cfg["observe"])
    N = int(cfg["N"]) if cfg.get("N") is not None else max(observe)
    n = int(cfg["samples"])
    if n < 1:
        raise ConfigError("samples must be >= 1")
    pos, _ = simulate_batch(params, N, n, int(cfg["seed"]), observe, cfg["ghosts"], threads=int(cfg["threads"]))
    rows = ((r, k, int(pos[r, -1, j])) for r in range(n) for j, k in enumerate(observe))
    emit_csv(rows, SCHEMAS["simulate"], cfg["out"])
    return 0


def cmd_exact(cfg):
    from .fredholm import KernelCache, joint_cdf
    from .model import JointQuery

    params = _params(cfg)
    _need(cfg, "indices")
    idx = _int_list(cfg["indices"])
    tol = float(cfg["tol"] or 1e-10)
    cache = KernelCache(params, cfg["system"])
    if cfg["batch"]:
        rows = []
        with open(cfg["batch"]) as fh:
            for line in csv.reader(fh):
                if not line or not line[0].strip().lstrip("-").isdigit():
                    continue  # blank line or header
                rows.append([int(v) for v in line])
        recs = []
        for r, thr in enumerate(rows):
            q = JointQuery(idx, thr, cfg["convention"])
            recs.append((r, joint_cdf(q, params, tol, cfg["system"], cache=cache)[0]))
        emit_csv(recs, SCHEMAS["exact-batch"], cfg["out"])
        return 0
    _need(cfg, "thresholds")
    q = JointQuery(idx, _int_list(cfg["thresholds"]), cfg["convention"])
    val, rep = joint_cdf(q, params, tol, cfg["system"], cache=cache)
    emit_json(
        {
            "probability": val,
            "indices": list(q.indices),
            "thresholds": list(q.thresholds),
            "convention": q.convention.value,
            "system": cfg["system"],
            "W": rep.W,
            "window_deltas": rep.deltas,
            "max_nodes": rep.nodes,
        },
        cfg["out"],
    )
    return 0


def cmd_airy1(cfg):
    from .airy1 import Airy1Query, joint_cdf_airy1

    _need(cfg, "times", "levels")
    q = Airy1Query(
        tuple(_float_list(cfg["times"])),
        tuple(_float_list(cfg["levels"])),
        n_q=int(cfg["n_q"]),
        L=float(cfg["cutoff"]),
    )
    val, info = joint_cdf_airy1(q, float(cfg["tol"] or 1e-5), full_output=True)
    emit_json({"probability": val, "times": list(q.times), "levels": list(q.levels), **info}, cfg["out"])
    return 0


def cmd_f1_table(cfg):
    from .airy1 import f1_point

    grid = _s_grid(cfg)
    tol = float(cfg["tol"] or 1e-6)
    vals = _pmap(lambda s: f1_point(s, n_q=int(cfg["n_q"]), tol=tol), grid, int(cfg["threads"]))
    emit_csv(zip(grid, vals), SCHEMAS["f1-table"], cfg["out"])
    return 0


def cmd_converge(cfg):
    from .airy1 import f1_point
    from .fredholm import KernelCache
    from .model import ModelParams
    from .scaling import constants, kernel_limit_error, rescaled_cdf

    _need(cfg, "p", "d")
    frame = constants(float(cfg["p"]), int(cfg["d"]))
    ts = _int_list(cfg["ts"])
    threads = int(cfg["threads"])
    if cfg["kernel"]:
        r1, r2 = float(cfg["r1"]), float(cfg["r2"])
        svals = _s_grid(cfg) if cfg["s1"] is None else [float(cfg["s1"])]
        jobs = [(t, s) for t in ts for s in svals]

        def kjob(job):
            t, s = job
            s2 = s if cfg["s2"] is None else float(cfg["s2"])
            return (t, r1, s, r2, s2, kernel_limit_error(t, r1, s, r2, s2, frame))

        emit_csv(_pmap(kjob, jobs, threads), SCHEMAS["kernel-error"], cfg["out"])
        return 0
    grid = _s_grid(cfg)
    tol = float(cfg["tol"] or 1e-9)

    def tjob(t):
        cache = KernelCache(ModelParams(frame.p, frame.d, t))
        out = []
        for s in grid:
            fin = rescaled_cdf(t, [0.0], [s], frame, tol, cache=cache, centered=bool(cfg["centered"]))
            lim = f1_point(s)
            out.append((t, s, fin, lim, fin - lim))
        return out

    rows = [r for block in _pmap(tjob, ts, threads) for r in block]
    emit_csv(rows, SCHEMAS["converge"], cfg["out"])
    return 0


def cmd_kernel_eval(cfg):
    from .kernel import kernel_finite_matrix, kernel_matrix

    params = _params(cfg)
    _need(cfg, "n1", "x1", "n2", "x2")
    n1, x1, n2, x2 = (int(cfg[k]) for k in ("n1", "x1", "n2", "x2"))
    conj = bool(cfg["conjugate"])
    if cfg["system"] == "half":
        val = kernel_finite_matrix(params, n1, [x1], n2, [x2], conjugate=conj)
        info = {"method": "finite"}
    else:
        kw = {"tol": float(cfg["tol"])} if cfg["tol"] else {}
        val, info = kernel_matrix(params, n1, [x1], n2, [x2], conjugate=conj, method=cfg["method"], **kw)
    emit_json(
        {"value": float(val[0, 0]), "nodes_used": info.get("nodes"), "n1": n1, "x1": x1, "n2": n2, "x2": x2, "conjugate": conj, "system": cfg["system"], **info},
        cfg["out"],
    )
    return 0


def cmd_selftest(cfg):
    from .selftest import run_checks

    results = run_checks(krawtchouk=bool(cfg["krawtchouk"]))
    lines = [f"{'check':<44} {'status':<6} detail"]
    for name, ok, detail in results:
        lines.append(f"{name:<44} {'PASS' if ok else 'FAIL':<6} {detail}")
    _write("\n".join(lines) + "\n", cfg["out"])
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "airy1": cmd_airy1,
    "f1-table": cmd_f1_table,
    "converge": cmd_converge,
    "kernel-eval": cmd_kernel_eval,
    "selftest": cmd_selftest,
}


def parse_and_run(argv=None) -> int:
    """Run one subcommand; returns the exit code."""
    if not logging.getLogger().handlers and not log.handlers:
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        log.addHandler(h)
        log.setLevel(logging.INFO)
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:  # argparse: --help/--version exit 0, errors exit 2
        return int(exc.code or 0)
    except ConfigError as exc:
        log.error("invalid input: %s", exc)
        return 2
    log.info("version=%s command=%s seed=%s config=%s", __version__, cfg["command"], cfg["seed"], config_digest(cfg))
    try:
        return COMMANDS[cfg["command"]](cfg)
    except NonConvergence as exc:
        log.error("no convergence: %s", exc)
        return 3
    except (ValueError, TypeError, TasepError, OSError) as exc:
        log.error("invalid input: %s", exc)
        return 2


def main() -> None:
    sys.exit(parse_and_run())


if __name__ == "__main__":
    main()
