"""Command-line front end.

Commands: ``validate``, ``posterior``, ``eb``, ``hb``, ``simulate``.  Exit
codes: 0 success, 1 internal error, 2 validation error, 3 config error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import files
from .empirical_bayes import HyperPriorGrid, describe_fit, eb_posterior, format_fit, hierarchical_posterior
from .errors import BayesTrendsError, ConfigError
from .gaussian import normal_quantile, posterior
from .model import EventStudy, split_covariance
from .plot import event_study_svg
from .priors import build_prior, prior_spec_from_dict, prior_spec_to_dict
from .simulator import CSV_COLUMNS, DgpSpec, coverage_experiment, mle_consistency_experiment

log = logging.getLogger("bayestrends")

REPORT_COLUMNS = ["period", "ols_estimate", "ols_lo", "ols_hi", "bayes_mean", "bayes_lo", "bayes_hi"]
MLE_COLUMNS = ["n_pre", "median_abs_err_mu", "median_abs_err_sigma2", "boundary_rate", "n_reps"]


def load_event_study(input_path, cov_path=None):
    """``(EventStudy, raw_bytes)`` from JSON, or from CSV when ``cov_path`` is given."""
    if cov_path is not None:
        est, cov = files.read_bytes(input_path), files.read_bytes(cov_path)
        return files.read_event_study_csv(est, cov, str(input_path), str(cov_path)), est + cov
    doc, raw = files.load_json(input_path, files.EVENT_STUDY_SCHEMA)
    return EventStudy.from_dict(doc), raw


def report_rows(es: EventStudy, summary, level):
    z = normal_quantile((1.0 + level) / 2.0)
    sd = np.sqrt(np.diag(split_covariance(es)[1]))
    iv = summary.intervals
    for t, p in enumerate(es.post_periods):
        b = float(es.beta_post[t])
        yield [
            p,
            b,
            b - z * float(sd[t]),
            b + z * float(sd[t]),
            float(summary.tau_mean[t]),
            float(iv.lower[t]),
            float(iv.upper[t]),
        ]


def _emit(out_path, fmt, es, summary, level, doc, input_hash):
    doc = {**doc, "input_sha256": input_hash, "versions": files.versions(), "level": level}
    doc["posterior"] = summary.to_dict()
    if fmt == "json":
        files.write_text(out_path, files.dump_json(doc))
        return
    files.write_text(out_path, files.table_csv(REPORT_COLUMNS, report_rows(es, summary, level), input_hash))
    files.write_text(files.sidecar_path(out_path), files.dump_json(doc))


def cmd_validate(input_path, out_path=None, cov_path=None):
    es, _ = load_event_study(input_path, cov_path)
    text = files.dump_json(es.to_dict())
    if out_path is None:
        sys.stdout.write(text)
    else:
        files.write_text(out_path, text)
    return es


def cmd_posterior(input_path, prior_config_path, level=0.95, out_path="posterior.csv", fmt="csv", cov_path=None, svg_path=None):
    es, raw = load_event_study(input_path, cov_path)
    prior_doc, prior_raw = files.load_json(prior_config_path, files.PRIOR_SCHEMA)
    spec = prior_spec_from_dict(prior_doc)
    summary = posterior(es, build_prior(spec, es.n_pre, es.n_post), level)
    input_hash = files.sha256_bytes(raw, prior_raw)
    _emit(out_path, fmt, es, summary, level, {"command": "posterior", "prior": prior_spec_to_dict(spec)}, input_hash)
    if svg_path is not None:
        files.write_text(svg_path, event_study_svg(es, summary, level))
    return summary


def cmd_eb(input_path, mode="mle", hyper_config_path=None, level=0.95, out_path="eb.csv", fmt="csv", cov_path=None, svg_path=None):
    es, raw = load_event_study(input_path, cov_path)
    chunks = [raw]
    doc = {"command": "eb", "mode": mode}
    if mode == "mle":
        fit, summary = eb_posterior(es, level)
        doc.update(fit=fit.to_dict(), fit_line=format_fit(fit), description=describe_fit(fit))
        log.info("%s", format_fit(fit))
    elif mode == "hierarchical":
        grid = None
        if hyper_config_path is not None:
            hyper_doc, hyper_raw = files.load_json(hyper_config_path, files.HYPER_SCHEMA)
            grid = HyperPriorGrid.from_config(hyper_doc)
            chunks.append(hyper_raw)
            doc["hyper"] = hyper_doc
        hp, summary = hierarchical_posterior(es, grid, level)
        doc["hyper_posterior"] = hp.to_dict()
    else:
        raise ConfigError(f"unknown eb mode {mode!r}; expected 'mle' or 'hierarchical'")
    _emit(out_path, fmt, es, summary, level, doc, files.sha256_bytes(*chunks))
    if svg_path is not None:
        files.write_text(svg_path, event_study_svg(es, summary, level))
    return summary


def _dgp_from_config(cfg, seed):
    n_pre, n_post = cfg["n_pre"], cfg["n_post"]
    if "sigma" in cfg:
        sigma = np.asarray(cfg["sigma"], dtype=float)
    else:
        sigma = cfg["sigma_scale"] ** 2 * np.eye(n_pre + n_post)
    return DgpSpec(prior_spec_from_dict(cfg["prior"], "config.prior"), cfg["tau_post"], sigma, n_pre, n_post, seed)


def cmd_simulate(config_path, out_path="coverage.csv", seed=None):
    cfg, raw = files.load_json(config_path, files.SIMULATE_SCHEMA)
    seed = int(seed if seed is not None else cfg.get("seed", 0))
    input_hash = files.sha256_bytes(raw, str(seed).encode())
    prov = {"command": "simulate", "config": cfg, "seed": seed, "input_sha256": input_hash, "versions": files.versions()}

    if cfg["experiment"] == "coverage":
        dgp = _dgp_from_config(cfg, seed)
        analysis = None
        if "analysis_prior" in cfg:
            spec = prior_spec_from_dict(cfg["analysis_prior"], "config.analysis_prior")
            analysis = build_prior(spec, dgp.n_pre, dgp.n_post)
        grid = HyperPriorGrid.from_config(cfg["hyper"]) if "hyper" in cfg else None
        report = coverage_experiment(dgp, cfg["method"], cfg["n_reps"], cfg.get("level", 0.95), analysis, grid)
        rows = [[r[c] for c in CSV_COLUMNS] for r in report.rows()]
        text = files.table_csv(CSV_COLUMNS, rows, input_hash)
        prov["n_reps"] = report.n_reps
        result = report
    else:
        table = mle_consistency_experiment(
            cfg["true_mu"], cfg["true_sigma2"], cfg["sigma_scale"], cfg["n_pre_list"], cfg["n_reps"], seed
        )
        text = files.table_csv(MLE_COLUMNS, [[r[c] for c in MLE_COLUMNS] for r in table], input_hash)
        result = table
    files.write_text(out_path, text)
    files.write_text(files.sidecar_path(out_path), files.dump_json(prov))
    return result


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bayestrends", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, prior=False):
        p.add_argument("--input", required=True, help="event study JSON, or estimates CSV with --cov")
        p.add_argument("--cov", help="covariance CSV (CSV input mode)")
        if prior:
            p.add_argument("--prior", required=True, help="prior spec JSON")
        p.add_argument("--level", type=float, default=0.95)
        p.add_argument("--out", required=True)
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--svg", help="also write a static SVG figure here")
        p.add_argument("--seed", type=int, help="accepted for uniformity; these commands are deterministic")

    p = sub.add_parser("validate", help="check an event study and print its canonical JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--cov")
    p.add_argument("--out")

    common(sub.add_parser("posterior", help="posterior under a user-specified prior"), prior=True)

    p = sub.add_parser("eb", help="empirical Bayes (random-walk MLE) or hierarchical posterior")
    common(p)
    p.add_argument("--mode", choices=["mle", "hierarchical"], default="mle")
    p.add_argument("--hyper", help="hyper-prior grid JSON (hierarchical mode)")

    p = sub.add_parser("hb", help="hierarchical Bayes over a hyper-prior grid")
    common(p)
    p.add_argument("--hyper", help="hyper-prior grid JSON")

    p = sub.add_parser("simulate", help="run a coverage or MLE-consistency experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    return ap


def run(args) -> None:
    level = getattr(args, "level", 0.95)
    if args.command == "validate":
        cmd_validate(args.input, args.out, args.cov)
    elif args.command == "posterior":
        cmd_posterior(args.input, args.prior, level, args.out, args.format, args.cov, args.svg)
    elif args.command == "eb":
        cmd_eb(args.input, args.mode, args.hyper, level, args.out, args.format, args.cov, args.svg)
    elif args.command == "hb":
        cmd_eb(args.input, "hierarchical", args.hyper, level, args.out, args.format, args.cov, args.svg)
    elif args.command == "simulate":
        cmd_simulate(args.config, args.out, args.seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        run(args)
    except BayesTrendsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
