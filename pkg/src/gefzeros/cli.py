"""Command-line surface: reproducible experiment runs and data emission.

Subcommands: constants, measures, optimize, sample, hole-mcmc, construct,
hist, verify.  Outputs are CSV (tables), JSON (objects), or NDJSON (sample
streams); every file carries a header with the resolved-config hash, the
library version, and the seed.  Exit code 2 signals a configuration error,
3 a numerical-assertion failure, with machine-readable JSON on stderr.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import conditional_sampler as cs
from . import constants as K
from . import energy_optimizer as eo
from . import radial_measures as rm
from . import rootfinder as rf
from . import series_core as sc

log = logging.getLogger("gefzeros")


class NumericalAssertion(RuntimeError):
    pass


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _header(cfg: dict, args) -> str:
    parts = [f"config_hash={_config_hash(cfg)}", f"version={__version__}",
             f"seed={cfg.get('seed')}"]
    if not args.no_timestamp:
        parts.append(f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S')}")
    return "# " + " ".join(parts)


def _emit(text: str, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# fallback values applied only when neither a flag nor the config file sets
# the key; parser defaults stay None so the file can override them
_DEFAULTS = {
    "p-grid": "0:3:0.01", "which": "gef_constrained", "alpha": "10",
    "shells": "800", "budget": "20000", "n-samples": "100", "N": "64",
    "L": "2.67", "hole-radius": "1.0", "sweeps": "2000", "thin": "10",
    "r": "4", "draws": "100", "bins": "40",
}


def _resolve_config(args, keys) -> dict:
    """Precedence: CLI flags > config file > built-in defaults."""
    file_cfg = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
    cfg = {}
    for key in keys:
        flag = getattr(args, key.replace("-", "_"))
        cfg[key] = flag if flag is not None else file_cfg.get(key, _DEFAULTS.get(key))
    cfg["seed"] = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    return cfg


def _parse_grid(spec: str):
    start, stop, step = (float(x) for x in spec.split(":"))
    return np.arange(start, stop + step / 2, step)


# ---- subcommand bodies --------------------------------------------------------

def cmd_constants(args):
    cfg = _resolve_config(args, ["p-grid"])
    rows = ["p,q,Z_p,G_p"]
    for p in _parse_grid(cfg["p-grid"] or "0:3:0.01"):
        p = float(p)
        if abs(p - 1.0) < 1e-12:
            p = 1.0
        rows.append(f"{p:.6g},{K.q_of_p(p):.12g},{K.z_const(p):.12g},{K.ginibre_g(p):.12g}")
    _emit(_header(cfg, args) + "\n" + "\n".join(rows) + "\n", args)
    return 0


def cmd_measures(args):
    cfg = _resolve_config(args, ["p", "alpha", "which"])
    p, alpha = float(cfg["p"]), float(cfg["alpha"])
    which = cfg["which"] or "gef_constrained"
    nu = rm.catalog(p, alpha, which)
    payload = {
        "meta": {"config_hash": _config_hash(cfg), "version": __version__,
                 "seed": cfg.get("seed")},
        "measure": json.loads(nu.to_json()),
        "total_mass": nu.total_mass,
    }
    if which != "gef_global_radon":
        rep = rm.functional_I(nu, alpha)
        payload["functional"] = {
            "Sigma": rep.energy, "B_alpha": rep.B_alpha, "I_alpha": rep.I_alpha,
            "J_alpha": rep.J_alpha, "J_alpha_half": rep.J_alpha_half,
            "argmax_w": rep.argmax_w,
        }
        if which == "gef_constrained":
            payload["functional"]["I_closed_form"] = rm.catalog_I(p, alpha)
    if args.format == "csv":
        s = np.linspace(0, np.sqrt(alpha), 200)
        rows = ["radius,U"] + [f"{x:.8g},{rm.log_potential(nu, float(x)):.12g}" for x in s]
        _emit(_header(cfg, args) + "\n" + "\n".join(rows) + "\n", args)
    else:
        _emit(json.dumps(payload, indent=2) + "\n", args)
    return 0


def cmd_optimize(args):
    cfg = _resolve_config(args, ["p", "alpha", "shells", "budget", "constraint"])
    p, alpha = float(cfg["p"]), float(cfg["alpha"])
    kind = cfg["constraint"]
    if kind is None or kind == "auto":
        kind = "none" if p < 0 else ("F" if p < 1 else "M")
    constraint = None if kind == "none" else eo.DiskConstraint(kind, p)
    res = eo.minimize(alpha, constraint, grid_spec=(int(cfg["shells"]), None),
                      budget=int(cfg["budget"]))
    closed = rm.catalog_I(p, alpha) if constraint else np.log(alpha) / 2 - 0.75
    payload = {
        "meta": {"config_hash": _config_hash(cfg), "version": __version__,
                 "seed": cfg.get("seed")},
        "I": res.I_value, "I_closed_form": closed, "gap": res.I_value - closed,
        "radii": res.grid.radii.tolist(), "masses": res.grid.masses.tolist(),
    }
    _emit(json.dumps(payload) + "\n", args)
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write(_header(cfg, args) + "\niter,I_best,feasibility,argmax_radius\n")
            for it, best, feas, arg in res.trace:
                fh.write(f"{it},{best:.12g},{feas:.3g},{arg:.8g}\n")
    return 0


def cmd_sample(args):
    cfg = _resolve_config(args, ["n-samples", "N", "L"])
    n_samples, N, L = int(cfg["n-samples"]), int(cfg["N"]), float(cfg["L"])
    streams = sc.split_streams(cfg["seed"], n_samples)

    def one(i):
        for attempt in range(8):
            c = sc.CoeffVector(sc.sample_coeffs(N, streams[i]).coeffs, scale=L)
            try:
                return rf.to_ndjson_record(rf.roots(c), f"{cfg['seed']}/{i}", N, L)
            except rf.ResampleNeeded:
                continue
        raise NumericalAssertion(f"sample {i}: persistent near-multiple roots")

    workers = args.threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as ex:
        lines = list(ex.map(one, range(n_samples)))
    _emit(_header(cfg, args) + "\n" + "\n".join(lines) + "\n", args)
    return 0


def cmd_hole_mcmc(args):
    cfg = _resolve_config(args, ["N", "L", "hole-radius", "sweeps", "thin", "burn"])
    N, L = int(cfg["N"]), float(cfg["L"])
    ctx = cs.make_context(N, L)
    rng = np.random.default_rng(cfg["seed"])
    res = cs.mh_hole_chain(ctx, float(cfg["hole-radius"]), int(cfg["sweeps"]), rng,
                           thin=int(cfg["thin"]),
                           burn=None if cfg["burn"] is None else int(cfg["burn"]))
    if not (0.1 <= res.acceptance_rate <= 0.6):
        raise NumericalAssertion(
            f"acceptance rate {res.acceptance_rate:.3f} escaped [0.1, 0.6]")
    lines = [rf.to_ndjson_record(zc, cfg["seed"], N, L) for zc in res.configs]
    head = _header(cfg, args) + f" acceptance={res.acceptance_rate:.3f}"
    _emit(head + "\n" + "\n".join(lines) + "\n", args)
    return 0


def cmd_construct(args):
    cfg = _resolve_config(args, ["r", "p", "draws"])
    r, p, draws = float(cfg["r"]), float(cfg["p"]), int(cfg["draws"])
    rng = np.random.default_rng(cfg["seed"])
    lines = []
    for _ in range(draws):
        s = cs.construct_rare_event(r, p, rng)
        rec = {"k0": s.k0, "holds": s.certificate["holds"],
               "rouche_margin": s.certificate["rouche_margin"]}
        if s.certificate["holds"]:
            rec["count"] = s.count_in_disk()
            if rec["count"] != s.k0:
                raise NumericalAssertion("certified draw with wrong zero count")
        lines.append(json.dumps(rec))
    _emit(_header(cfg, args) + "\n" + "\n".join(lines) + "\n", args)
    return 0


def cmd_hist(args):
    cfg = _resolve_config(args, ["input", "bins", "window"])
    zcs = []
    with open(cfg["input"]) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            zc, _ = rf.from_ndjson_record(line)
            zcs.append(zc)
    window = None
    if cfg["window"]:
        lo, hi = (float(x) for x in cfg["window"].split(":"))
        window = (lo, hi)
    h = cs.radial_histogram(zcs, bins=int(cfg["bins"]), window=window)
    dens = h.density()
    se = np.sqrt(np.maximum(h.counts, 1.0)) / (h.samples * np.pi * np.diff(h.bin_edges**2))
    rows = ["bin_lo,bin_hi,density,stderr"]
    for i in range(h.counts.size):
        rows.append(f"{h.bin_edges[i]:.8g},{h.bin_edges[i+1]:.8g},{dens[i]:.8g},{se[i]:.3g}")
    _emit(_header(cfg, args) + "\n" + "\n".join(rows) + "\n", args)
    return 0


def cmd_verify(args):
    checks = []

    def check(name, fn):
        try:
            ok = bool(fn())
        except Exception as exc:  # noqa: BLE001 - report, don't crash the table
            log.debug("check %s raised", name, exc_info=exc)
            ok = False
        checks.append((name, ok))

    rng = np.random.default_rng(0)
    check("q(0)=e, q(1)=1, q(e)=0",
          lambda: K.q_of_p(0) == np.e and K.q_of_p(1) == 1 and K.q_of_p(np.e) == 0)
    check("Z_0 = e^2/4", lambda: abs(K.z_const(0) - np.e**2 / 4) < 1e-12)
    check("psi continuous at 1 and 2",
          lambda: K.jlm_exponent(1.0) == 1.0 and K.jlm_exponent(2.0) == 4.0)
    check("log_b(0, r) = 0", lambda: sc.log_b(0, 7.3) == 0.0)
    check("eval constant poly", lambda: abs(
        sc.eval_poly(sc.CoeffVector([1.0]), 2 + 1j).value - 1.0) < 1e-14)
    check("equilibrium Sigma", lambda: abs(
        rm.log_energy(rm.equilibrium(10)) - (np.log(10) / 2 - 0.25)) < 1e-12)
    check("unit atom potential", lambda: rm.log_potential(
        rm.RadialMeasure(atoms=((1.0, 1.0),)), 2.0) == np.log(2.0))
    check("jensen unit atom", lambda: np.allclose(
        rm.jensen_check(rm.RadialMeasure(atoms=((1.0, 1.0),)), 2.0), np.log(2)))
    check("catalog probability mass", lambda: abs(
        rm.catalog(0.5, 10).total_mass - 1.0) < 1e-12)
    check("linear root", lambda: abs(
        rf.roots(sc.CoeffVector([1.0, 2.0], scale=1.0)).zeros[0] + 0.5) < 1e-12)
    check("winding count of z^N", lambda: rf.argument_principle_count(
        sc.CoeffVector([0, 0, 0, 0, 1.0]), 1.0) == 4)
    check("N=1 joint density", lambda: abs(
        np.exp(cs.log_joint_density(rf.ZeroConfig(np.array([0.3 + 0.1j])),
                                    cs.make_context(1, 2.0)))
        - 4.0 / (np.pi * (1 + 4 * 0.1**2 + 4 * 0.09) ** 2)) < 1e-12)
    check("coeff variance", lambda: abs(np.mean(
        np.abs(sc.sample_coeffs(200000, rng).coeffs) ** 2) - 1.0) < 0.02)

    width = max(len(n) for n, _ in checks)
    out = [f"{n.ljust(width)}  {'PASS' if ok else 'FAIL'}" for n, ok in checks]
    _emit("\n".join(out) + "\n", args)
    return 0 if all(ok for _, ok in checks) else 3


# ---- wiring --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="gefzeros", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", choices=["csv", "json"], default="json")
        p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("constants", help="table of (p, q, Z_p, G_p)")
    p.add_argument("--p-grid", default=None, help="start:stop:step (default 0:3:0.01)")
    common(p)
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("measures", help="catalog measure + functional report")
    p.add_argument("--p", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--which", default=None,
                   choices=["gef_constrained", "gef_global_radon", "ginibre"])
    common(p)
    p.set_defaults(fn=cmd_measures)

    p = sub.add_parser("optimize", help="constrained energy minimization")
    p.add_argument("--p", required=True)
    p.add_argument("--alpha", default=None)
    p.add_argument("--shells", default=None)
    p.add_argument("--budget", default=None)
    p.add_argument("--constraint", default=None, choices=["F", "M", "none", "auto"])
    p.add_argument("--trace-out", default=None)
    common(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("sample", help="unconditional zero batches (NDJSON)")
    p.add_argument("--n-samples", default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--L", default=None)
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("hole-mcmc", help="hole-constrained MH chain (NDJSON)")
    p.add_argument("--N", default=None)
    p.add_argument("--L", default=None)
    p.add_argument("--hole-radius", default=None)
    p.add_argument("--sweeps", default=None)
    p.add_argument("--thin", default=None)
    p.add_argument("--burn", default=None)
    common(p)
    p.set_defaults(fn=cmd_hole_mcmc)

    p = sub.add_parser("construct", help="certified rare-event draws")
    p.add_argument("--r", default=None)
    p.add_argument("--p", required=True)
    p.add_argument("--draws", default=None)
    common(p)
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("hist", help="reduce an NDJSON stream to a radial histogram CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--bins", default=None)
    p.add_argument("--window", default=None, help="lo:hi")
    common(p)
    p.set_defaults(fn=cmd_hist)

    p = sub.add_parser("verify", help="run the quick invariant table")
    p.add_argument("--fast", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_verify)
    return top


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GEF_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": "config", "detail": str(exc)}) + "\n")
        return 2
    except (NumericalAssertion, ArithmeticError) as exc:
        sys.stderr.write(json.dumps({"error": "numerical", "detail": str(exc)}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
