"""Command-line front end.

Every subcommand writes a table: CSV (header row, LF line endings) or a JSON
object ``{"meta": ..., "rows": [...]}`` validated by ``data/results.schema.json``.

Exit codes: 0 success, 1 usage error, 2 invariant violation detected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .combinatorics import (
    NORMAL_LIMIT,
    PAPER_THRESHOLD,
    check_lemma_properties,
    exact_probability,
    probability_sweep,
    recurrence_scan,
    sequence_table,
    threshold_scan,
)
from .geometry import geometric_report
from .montecarlo import DEFAULT_SEED, GENERATOR_NAME
from .orthant import mc_orthant_estimate
from .pca import CovarianceSpec, ZModel, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
FIGURE3_RANGE = (2, 993)

LEMMA_DESCRIPTIONS = {
    "1": "T(p) = p/2 for even p",
    "2": "T(p+1) = T(p) for even p",
    "3": "T(p+2) = T(p) + 1",
    "4": "L(p+1) in {L(p), L(p)+1}",
    "5": "R(p+1) in {R(p)-1, R(p), R(p)+1}",
    "6": "R(p+2) in {R(p), R(p)+1}",
    "7": "L(p+2) in {L(p), L(p)+1}",
    "8": "2 <= #class(l) <= 3 for complete classes",
    "9": "2^p D(p) < 2^p' D(p') for p < p' in one class",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> tuple[int, int]:
    """``"7"`` -> (7, 7); ``"2..993"`` -> (2, 993)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise UsageError(f"bad dimension or range {text!r}") from None


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, bool):
        return str(x).lower()
    return x


def _json_value(x):
    if isinstance(x, bool) or x is None or isinstance(x, float):
        return x
    if isinstance(x, int):
        # keep huge counts exact and parseable everywhere
        return x if abs(x) < 2**53 else str(x)
    return x


def render(rows: list[dict], meta: dict, fmt: str) -> str:
    if fmt == "json":
        payload = {"meta": meta, "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows]}
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _meta(command, args, seed=None, generator=None, parameters=None, notes=()):
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "generator": generator,
        "parameters": parameters or {},
        "notes": list(notes),
    }


def _range_arg(args, default=None) -> tuple[int, int]:
    text = args.p_range or args.p
    if text is None:
        if default is None:
            raise UsageError("a dimension range is required (--p A..B or --p-range A..B)")
        return default
    lo, hi = parse_range(text)
    if lo < 2:
        raise UsageError(f"dimensions must be >= 2, got {lo}")
    if hi < lo:
        raise UsageError(f"empty range {lo}..{hi}")
    return lo, hi


def _single_p(args, default=None) -> int:
    if args.p is None:
        if default is None:
            raise UsageError("--p is required")
        return default
    lo, hi = parse_range(args.p)
    if lo != hi:
        raise UsageError("this command takes a single dimension")
    if lo < 2:
        raise UsageError(f"dimension must be >= 2, got {lo}")
    return lo


# --------------------------------------------------------------------------
# subcommands; each returns (rows, meta, exit_code)


def cmd_exact(args):
    lo, hi = FIGURE3_RANGE if args.figure3 else _range_arg(args)
    rows = []
    for p, prob in enumerate(probability_sweep(lo, hi), start=lo):
        row = {"p": p, "probability": float(prob), "limit_gap": float(prob) - NORMAL_LIMIT}
        if args.exact_fractions:
            row["numerator"] = prob.numerator
            row["log2_denominator"] = prob.log2_denominator
        rows.append(row)
    status = EXIT_OK if all(2 * prob.numerator >= prob.denominator
                            for prob in probability_sweep(lo, hi)) else EXIT_VIOLATION
    return rows, _meta("exact", args, parameters={"p_min": lo, "p_max": hi}), status


def cmd_figure3(args):
    lo, hi = _range_arg(args, FIGURE3_RANGE)
    rows = [{"p": p, "probability": float(prob)}
            for p, prob in enumerate(probability_sweep(lo, hi), start=lo)]
    return rows, _meta("figure3", args, parameters={"p_min": lo, "p_max": hi}), EXIT_OK


def cmd_sequences(args):
    lo, hi = _range_arg(args)
    rows = [{"p": r.p, "p_star": r.p_star, "T": r.T, "R": r.R, "L": r.L, "D_scaled": r.D_scaled}
            for r in sequence_table(lo, hi)]
    return rows, _meta("sequences", args, parameters={"p_min": lo, "p_max": hi}), EXIT_OK


def cmd_lemma_check(args):
    lo, hi = _range_arg(args, (2, 1000))
    if hi == lo:
        raise UsageError("lemma-check needs at least two dimensions")
    rep = check_lemma_properties(lo, hi)
    rows = []
    for name, desc in LEMMA_DESCRIPTIONS.items():
        bad = rep.violations[name]
        rows.append({"property": name, "description": desc,
                     "status": "fail" if bad else "pass", "checked": rep.checked[name],
                     "violations": len(bad), "violating": " ".join(map(str, bad))})
    rows.append({"property": "lemma2", "description": "D_scaled(min class l) > D_scaled(min class l - 2)",
                 "status": "fail" if rep.lemma2_violations else "pass",
                 "checked": rep.lemma2_checked, "violations": len(rep.lemma2_violations),
                 "violating": " ".join(map(str, rep.lemma2_violations))})
    rows.append({"property": "lemma2-unscaled", "description": "same comparison on D = 2P - 1 (informational)",
                 "status": "informational", "checked": rep.lemma2_checked,
                 "violations": len(rep.lemma2_unscaled_violations),
                 "violating": " ".join(map(str, rep.lemma2_unscaled_violations))})
    rows.append({"property": "class-minima", "description": "min of D = 2P - 1 over class l increases in l (informational)",
                 "status": "informational", "checked": max(rep.complete_classes - 1, 0),
                 "violations": len(rep.class_minimum_decreases),
                 "violating": " ".join(map(str, rep.class_minimum_decreases))})
    for note in rep.anomalies:
        rows.append({"property": "D(2)", "description": note, "status": "anomaly",
                     "checked": 1, "violations": 0, "violating": ""})
    meta = _meta("lemma-check", args, parameters={"p_min": lo, "p_max": hi}, notes=rep.anomalies)
    return rows, meta, EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_recurrence(args):
    lo, hi = _range_arg(args, (2, 1000))
    if hi - lo < 2:
        raise UsageError("recurrence needs p_max >= p_min + 2")
    rows, broken = [], False
    for chk in recurrence_scan(lo, hi):
        row = {"p": chk.p, "side_condition": chk.side_condition, "holds": chk.holds}
        if args.exact_fractions:
            row["lhs"] = chk.lhs
            row["rhs"] = chk.rhs
        rows.append(row)
        broken |= chk.side_condition and not chk.holds
    return rows, _meta("recurrence", args, parameters={"p_min": lo, "p_max": hi}), (
        EXIT_VIOLATION if broken else EXIT_OK)


def cmd_threshold(args):
    p_max = _single_p(args, 2000)
    rep = threshold_scan(p_max)
    rows = [{"p_max": rep.p_max, "p0": rep.p0, "last_at_or_below": rep.last_at_or_below,
             "paper_p0": rep.paper_p0, "matches_paper": rep.matches_paper}]
    notes = [] if rep.matches_paper else [
        f"computed p0 = {rep.p0} differs from the stated {PAPER_THRESHOLD}: "
        f"P({rep.last_at_or_below}) <= 2/3"]
    return rows, _meta("threshold", args, parameters={"p_max": p_max}, notes=notes), EXIT_OK


def cmd_mc_orthant(args):
    p = _single_p(args)
    est = mc_orthant_estimate(p, args.n, args.seed)
    ref = float(exact_probability(p))
    rows = [{"p": p, "n": est.n_samples, "seed": est.seed, "estimate": est.estimate,
             "standard_error": est.standard_error, "reference": ref,
             "z_score": est.z_score(ref)}]
    return rows, _meta("mc-orthant", args, seed=args.seed, generator=GENERATOR_NAME,
                       parameters={"p": p, "n": args.n}), EXIT_OK


def cmd_mc_geometric(args):
    p = _single_p(args)
    rep = geometric_report(p, args.n, args.seed)
    est = rep.direct_event_frequency
    cos = rep.conditional_centroid_cosines
    rows = [{
        "p": p, "n": rep.n_samples, "seed": rep.seed,
        "estimate": est.estimate, "standard_error": est.standard_error,
        "reference": rep.exchangeability_reference,
        "z_score": est.z_score(rep.exchangeability_reference),
        "ties": rep.ties,
        "orthant_model_probability": rep.orthant_model_probability,
        "claimed_lower_bound": 0.5, "claimed_limit": rep.claimed_limit,
        "discrepancy": rep.discrepancy,
        "centroid_claim": rep.centroid_claim,
        "centroid_cosine_min": min(cos), "centroid_cosine_max": max(cos),
        "mean_folded_cosine": rep.mean_folded_cosine.estimate,
        "mean_folded_cosine_se": rep.mean_folded_cosine.standard_error,
    }]
    notes = [rep.note]
    if rep.discrepancy:
        notes.append(f"p={p}: orthant-model value {rep.orthant_model_probability:.6f} is outside "
                     f"4 SE of the measured direct-event frequency {est.estimate:.6f}")
    return rows, _meta("mc-geometric", args, seed=args.seed, generator=GENERATOR_NAME,
                       parameters={"p": p, "n": args.n, "j_histogram": rep.j_histogram},
                       notes=notes), EXIT_OK


def load_pca_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict) or "p" not in cfg:
        raise UsageError("config must be a JSON object with at least 'p'")
    return cfg


def cmd_pca(args):
    cfg = load_pca_config(args.config)
    seed = args.seed if args.seed_given else cfg.get("seed", DEFAULT_SEED)
    trials = args.trials or cfg.get("trials", 1000)
    spec = CovarianceSpec(p=cfg["p"], kind=cfg.get("covariance", "identity"),
                          spectrum=cfg.get("spectrum"), seed=cfg.get("spd_seed"))
    z_model = ZModel(kind=cfg.get("z_model", "random_direction"), noise=cfg.get("noise", 1.0))
    rep = run_experiment(spec, k=cfg.get("k", 1), i=cfg.get("i", 1),
                         n_obs=cfg.get("n_obs", 20 * spec.p), n_trials=trials,
                         z_model=z_model, seed=seed,
                         full_matrix=cfg.get("full_matrix", False),
                         sample_pca=cfg.get("sample_pca", False))
    rows = [{"k": k, "i": i, "estimate": est.estimate, "standard_error": est.standard_error,
             "n": est.n_samples, "skipped": rep.skipped, "pc_source": rep.pc_source}
            for (k, i), est in sorted(rep.estimates.items())]
    return rows, _meta("pca", args, seed=seed, generator=GENERATOR_NAME,
                       parameters=rep.config, notes=rep.notes), EXIT_OK


COMMANDS = {
    "exact": (cmd_exact, "exact probabilities with their gap to the normal limit"),
    "figure3": (cmd_figure3, "convergence series, p = 2..993 by default"),
    "sequences": (cmd_sequences, "p*, T, R, L and scaled D per dimension"),
    "lemma-check": (cmd_lemma_check, "check the structural sequence properties"),
    "recurrence": (cmd_recurrence, "check the two-step recurrence of scaled D"),
    "threshold": (cmd_threshold, "smallest p0 after which P(p) > 2/3"),
    "mc-orthant": (cmd_mc_orthant, "Monte Carlo estimate of the orthant model"),
    "mc-geometric": (cmd_mc_geometric, "Monte Carlo estimate of the literal geometric event"),
    "pca": (cmd_pca, "principal-component correlation experiment from a JSON config"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", help="dimension, or range A..B")
    common.add_argument("--p-range", help="dimension range A..B")
    common.add_argument("--n", type=int, default=10**6, help="Monte Carlo samples")
    common.add_argument("--trials", type=int, help="PCA experiment trials")
    common.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--exact-fractions", action="store_true",
                        help="also print exact numerators")

    parser = _Parser(prog="orthantprob", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "exact":
            sp.add_argument("--figure3", action="store_true", help="use the range 2..993")
        if name == "pca":
            sp.add_argument("config", help="JSON experiment config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = DEFAULT_SEED
    for flag in ("n", "trials", "seed"):
        value = getattr(args, flag)
        if value is not None and (value < 0 or (value == 0 and flag != "seed")):
            print(f"orthantprob: error: --{flag} must be positive", file=sys.stderr)
            return EXIT_USAGE
    handler = COMMANDS[args.command][0]
    try:
        rows, meta, status = handler(args)
    except (UsageError, ValueError) as exc:
        print(f"orthantprob: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(rows, meta, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.format == "csv":
        for note in meta["notes"]:
            print(f"note: {note}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
