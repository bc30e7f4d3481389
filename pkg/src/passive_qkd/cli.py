"""Command-line entry point ``qkd``.

    qkd rate|sweep|optimize|cutoff|montecarlo --config FILE [--set key=value]... [--out PATH]

Exit codes: 0 success, 2 configuration, 3 numerical failure, 4 I/O,
5 Monte Carlo mismatch (some |z| > 5).
"""

import argparse
import csv
import json
import math
import os
import sys

from .config import load
from .detection import eta_sys, gauss_moments
from .errors import ConfigError, DomainError, NumericalError
from .key_rate import active_observed, passive_rate, true_e1, yield_n
from .montecarlo import compare, run_detection_mc
from .optimizer import OptimizerOptions, distance_sweep, find_cutoff, optimize_at_distance
from .source import SourceConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO, EXIT_MC = 0, 2, 3, 4, 5
Z_FAIL = 5.0
SWEEP_HEADER = (
    "distance_km", "rate", "log10_rate", "mu_t", "omega", "theta_lambda",
    "Q_s", "Q_d", "E_s", "E_d", "Y1_L", "e1_U",
)
NAN = float("nan")


def fmt(x):
    """Locale-independent round-trip formatting; ``-inf`` for log10(0)."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _log10(rate):
    return math.log10(rate) if rate > 0 else -math.inf


def _options(cfg, variant):
    o = cfg.options
    return OptimizerOptions(
        variant=variant,
        grid_mu_t=o["grid_mu_t"],
        grid_omega=o["grid_omega"],
        optimize_lambda=o["optimize_lambda"],
        theta_lambda=cfg.source.theta_lambda,
        t=cfg.source.t,
        max_iter=o["max_iter"],
        method=o["method"],
    )


def _lines(pairs):
    return "".join(f"{k} = {fmt(v) if not isinstance(v, (bool, int)) else v}\n" for k, v in pairs)


def rate_record(cfg):
    res = passive_rate(cfg.source, cfg.channel, method=cfg.options["method"])
    st, ob, b = res.stats, res.observed, res.bounds_used
    rec = [
        ("distance_km", cfg.channel.distance),
        ("mu_t", cfg.source.mu_t),
        ("omega", cfg.source.omega),
        ("theta_lambda", cfg.source.theta_lambda),
        ("eta_sys", eta_sys(cfg.channel)),
        ("rate", res.rate_total),
        ("rate_signal", res.rate_signal),
        ("rate_decoy", res.rate_decoy),
    ]
    for n in range(3):
        rec += [(f"p{n}_signal", st.p_signal[n]), (f"p{n}_decoy", st.p_decoy[n])]
    rec += [
        ("Q_s", ob.q_signal), ("Q_d", ob.q_decoy), ("E_s", ob.e_signal), ("E_d", ob.e_decoy),
        ("Y0_L", b.y0_lower), ("Y0_U", b.y0_upper), ("Y1_L", b.y1_lower), ("e1_U", b.e1_upper),
        ("combined_signal", b.combined_signal), ("combined_decoy", b.combined_decoy),
    ]
    return rec


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_rate(cfg, out):
    rec = rate_record(cfg)
    sys.stdout.write(_lines(rec))
    if out:
        _write_text(out, json.dumps({k: fmt(v) for k, v in rec}, indent=2) + "\n")


def sweep_row(d, res, cfg, variant):
    """One CSV row for the optimum ``res`` of ``variant`` at distance ``d``."""
    ch = cfg.channel.at(d)
    row = {"distance_km": d, "rate": res.best_rate, "log10_rate": _log10(res.best_rate)}
    if variant == "passive2":
        row.update(mu_t=res.best_mu_t, omega=res.best_omega, theta_lambda=res.best_theta_lambda)
        src = SourceConfig.from_mu_t(res.best_mu_t, res.best_omega, res.best_theta_lambda, cfg.source.t)
        r = passive_rate(src, ch, method=cfg.options["method"])
        ob, b = r.observed, r.bounds_used
        row.update(Q_s=ob.q_signal, Q_d=ob.q_decoy, E_s=ob.e_signal, E_d=ob.e_decoy,
                   Y1_L=b.y1_lower, e1_U=b.e1_upper)
    elif variant == "passive_inf":
        # one interval covering every phase; the exact yields stand in for bounds
        _, q, e = gauss_moments((0.0, math.pi), 2.0 * res.best_mu_t, eta_sys(ch), ch.epsilon_B, res.best_omega)
        row.update(mu_t=res.best_mu_t, omega=res.best_omega, theta_lambda=math.pi,
                   Q_s=float(q), Q_d=NAN, E_s=float(e), E_d=NAN,
                   Y1_L=yield_n(1, ch), e1_U=true_e1(res.best_omega, ch))
    else:
        q, e = active_observed(res.best_mu_t, ch)
        row.update(mu_t=res.best_mu_t, omega=NAN, theta_lambda=NAN, Q_s=q, Q_d=NAN, E_s=e, E_d=NAN,
                   Y1_L=yield_n(1, ch), e1_U=true_e1(math.pi / 4, ch))
    return [fmt(row[k]) for k in SWEEP_HEADER]


def _sweep_paths(out, variants):
    if out is None:
        return {v: f"sweep_{v}.csv" for v in variants}
    if len(variants) == 1 and not os.path.isdir(out) and out.endswith(".csv"):
        return {variants[0]: out}
    os.makedirs(out, exist_ok=True)
    return {v: os.path.join(out, f"sweep_{v}.csv") for v in variants}


def cmd_sweep(cfg, out):
    variants = cfg.options["variants"]
    paths = _sweep_paths(out, variants)
    grid = cfg.distance_grid()
    for v in variants:
        results = distance_sweep(grid, cfg.channel, _options(cfg, v))
        rows = [sweep_row(d, res, cfg, v) for d, res in results]
        with open(paths[v], "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_HEADER)
            w.writerows(rows)
        print(f"{v}: {len(rows)} rows -> {paths[v]}")


def cmd_optimize(cfg, out):
    lines = []
    for v in cfg.options["variants"]:
        res = optimize_at_distance(cfg.channel.distance, cfg.channel, _options(cfg, v))
        lines += [
            (f"{v}.distance_km", cfg.channel.distance),
            (f"{v}.best_mu_t" if v != "active_inf" else f"{v}.best_mu", res.best_mu_t),
            (f"{v}.best_omega", res.best_omega),
            (f"{v}.best_theta_lambda", res.best_theta_lambda),
            (f"{v}.best_rate", res.best_rate),
            (f"{v}.evaluations", res.evaluations),
            (f"{v}.converged", res.converged),
        ]
    text = _lines(lines)
    sys.stdout.write(text)
    if out:
        _write_text(out, text)


def cmd_cutoff(cfg, out):
    lines = [(f"{v}.cutoff_km", find_cutoff(cfg.channel, _options(cfg, v))) for v in cfg.options["variants"]]
    text = _lines(lines)
    sys.stdout.write(text)
    if out:
        _write_text(out, text)


def cmd_montecarlo(cfg, out):
    o = cfg.options
    rep = run_detection_mc(cfg.source, cfg.channel, o["n_samples"], o["seed"], o["shards"], o["workers"])
    rows = compare(rep, cfg.source, cfg.channel)
    lines = [f"# generator={rep.generator} seed={rep.seed} n_samples={rep.n_samples}\n",
             "quantity,analytic,empirical,stderr,z\n"]
    worst = 0.0
    for r in rows:
        z = r.z
        if not math.isnan(z):
            worst = max(worst, abs(z))
        lines.append(",".join([r.name, fmt(r.analytic), fmt(r.empirical), fmt(r.stderr), fmt(z)]) + "\n")
    text = "".join(lines)
    sys.stdout.write(text)
    if out:
        _write_text(out, text)
    if worst > Z_FAIL:
        print(f"monte carlo mismatch: max |z| = {worst:.2f} > {Z_FAIL}", file=sys.stderr)
        return EXIT_MC
    return EXIT_OK


COMMANDS = {
    "rate": cmd_rate,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "cutoff": cmd_cutoff,
    "montecarlo": cmd_montecarlo,
}


def build_parser():
    p = argparse.ArgumentParser(prog="qkd", description="Passive decoy-state BB84 key-rate toolkit.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--out", help="output file (sweep: directory or .csv file)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config, args.set)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        code = COMMANDS[args.command](cfg, args.out)
    except DomainError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
