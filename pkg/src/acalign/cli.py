"""Command-line front end.

Subcommands: gen-dots, gen-gabor, detect-dots, detect-gabor, mask,
validate-h0, experiment, figures.  Pattern and detection files use the
JSON formats of :mod:`acalign.io`; invalid input exits with status 2 and
a message naming the offending field.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import dots, gabor, harness, io, masking, stimuli


def _write_out(out: str | None, data: bytes) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(out).write_bytes(data)


def _load_document(path):
    try:
        return io.load_document(path)
    except io.SchemaError as exc:
        raise click.exceptions.Exit(_schema_fail(exc))


def _schema_fail(exc) -> int:
    click.echo(f"error: {exc}", err=True)
    return 2


@click.group()
def main():
    """A-contrario alignment detection toolkit."""


@main.command("gen-dots")
@click.option("--recipe", type=click.Choice(["noise", "planted", "clusters",
                                             "grid", "density_step"]),
              default="noise", show_default=True)
@click.option("--n", default=100, show_default=True,
              help="Dot count (noise recipe).")
@click.option("--domain", default=512.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--aligned", default=7, show_default=True,
              help="Aligned dot count (planted recipe).")
@click.option("--noise-dots", default=20, show_default=True,
              help="Background dot count (planted/clusters recipes).")
@click.option("--grid-size", default=10, show_default=True)
@click.option("--out", default="-", show_default=True)
def gen_dots(recipe, n, domain, seed, aligned, noise_dots, grid_size, out):
    """Generate a dot pattern JSON file."""
    kwargs = {}
    if recipe == "noise":
        kwargs = {"n": n, "domain": domain}
    elif recipe == "planted":
        kwargs = {"n_aligned": aligned, "n_noise": noise_dots, "domain": domain}
    elif recipe == "clusters":
        kwargs = {"n_noise": noise_dots, "domain": domain}
    elif recipe == "grid":
        kwargs = {"m": grid_size}
    elif recipe == "density_step":
        kwargs = {"domain": domain}
    pattern = stimuli.gen_dot_scene(recipe, seed=seed, **kwargs)
    _write_out(out, io.dump_bytes(io.pattern_to_dict(pattern)))


@main.command("gen-gabor")
@click.option("--kind", type=click.Choice(["positive", "negative"]),
              default="positive", show_default=True)
@click.option("--n", default=200, show_default=True)
@click.option("--domain", default=496.0, show_default=True)
@click.option("--length", default=10, show_default=True,
              help="Aligned element count (positive only).")
@click.option("--jitter", default=0.0, show_default=True,
              help="Orientation jitter interval in radians.")
@click.option("--min-spacing", default=None, type=float)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="-", show_default=True)
def gen_gabor(kind, n, domain, length, jitter, min_spacing, seed, out):
    """Generate a Gabor field JSON file (with truth for positives)."""
    spec = stimuli.StimulusSpec(
        kind=kind, n=n, domain_width=domain, domain_height=domain,
        length=length if kind == "positive" else 0,
        jitter=jitter, min_spacing=min_spacing, seed=seed)
    record = stimuli.generate(spec)
    _write_out(out, io.dump_bytes(io.record_to_dict(record)))


def _detect_dots_impl(pattern, mode, filt, epsilon, band_factor):
    detections = dots.detect(pattern, mode=mode, epsilon=epsilon,
                             band_factor=band_factor)
    if filt != "none":
        cands = masking.from_dot_detections(pattern, detections, band_factor)
        detections = [c.detection
                      for c in masking.apply_filter(cands, filt, epsilon)]
    return detections


@main.command("detect-dots")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["basic", "refined"]),
              default="refined", show_default=True)
@click.option("--filter", "filt",
              type=click.Choice(["none", "exclusion", "masking"]),
              default="none", show_default=True)
@click.option("--epsilon", default=1.0, show_default=True)
@click.option("--band-factor", default=dots.BAND_FACTOR, show_default=True)
@click.option("--out", default="-", show_default=True)
def detect_dots(infile, mode, filt, epsilon, band_factor, out):
    """Detect dot alignments in a pattern file."""
    doc = _load_document(infile)
    if not isinstance(doc, dots.DotPattern):
        raise click.exceptions.Exit(
            _schema_fail("points: a dot pattern file is required"))
    detections = _detect_dots_impl(doc, mode, filt, epsilon, band_factor)
    _write_out(out, io.detections_to_bytes(detections))


@main.command("detect-gabor")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--width", default=None, type=float,
              help="Rectangle width (default: domain width / sqrt(N)).")
@click.option("--filter", "filt",
              type=click.Choice(["none", "exclusion", "masking"]),
              default="none", show_default=True)
@click.option("--epsilon", default=1.0, show_default=True)
@click.option("--out", default="-", show_default=True)
@click.option("--best", is_flag=True, help="Also print the best log10(NFA).")
def detect_gabor_cmd(infile, width, filt, epsilon, out, best):
    """Detect element alignments in a Gabor field file."""
    try:
        with open(infile, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "field" in data:
            data = data["field"]
        field = io.field_from_dict(data if isinstance(data, dict) else {})
    except (io.SchemaError, json.JSONDecodeError) as exc:
        raise click.exceptions.Exit(_schema_fail(exc))
    report = gabor.detect_gabor(field, rect_width=width, epsilon=epsilon)
    detections = report.detections
    if filt != "none":
        cands = masking.from_gabor_detections(field, detections)
        detections = [c.detection
                      for c in masking.apply_filter(cands, filt, epsilon)]
    if best:
        click.echo(f"best_log10_nfa {report.best_log_nfa:.12g}", err=True)
    _write_out(out, io.detections_to_bytes(detections))


@main.command("mask")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["basic", "refined"]),
              default="refined", show_default=True)
@click.option("--filter", "filt", type=click.Choice(["exclusion", "masking"]),
              default="masking", show_default=True)
@click.option("--epsilon", default=1.0, show_default=True)
@click.option("--band-factor", default=dots.BAND_FACTOR, show_default=True)
@click.option("--out", default="-", show_default=True)
def mask(infile, mode, filt, epsilon, band_factor, out):
    """Detect and filter redundant detections in one step."""
    doc = _load_document(infile)
    if not isinstance(doc, dots.DotPattern):
        raise click.exceptions.Exit(
            _schema_fail("points: a dot pattern file is required"))
    detections = _detect_dots_impl(doc, mode, filt, epsilon, band_factor)
    _write_out(out, io.detections_to_bytes(detections))


@main.command("validate-h0")
@click.option("--detector", type=click.Choice(["basic", "refined", "gabor"]),
              required=True)
@click.option("--n", default=100, show_default=True)
@click.option("--trials", default=200, show_default=True)
@click.option("--epsilon", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
def validate_h0(detector, n, trials, epsilon, seed):
    """Monte-Carlo false-alarm control check under the noise model."""
    res = harness.h0_montecarlo(detector, n=n, trials=trials, epsilon=epsilon,
                                seed=seed)
    status = "PASS" if res.passed else "FAIL"
    click.echo(f"{status} detector={detector} n={n} trials={trials} "
               f"mean={res.mean:.4f} ci={res.ci:.4f} epsilon={epsilon}")
    if not res.passed:
        raise click.exceptions.Exit(1)


@main.command("experiment")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seeds", default=20, show_default=True,
              help="Stimuli per (jitter, length) cell.")
@click.option("--n", default=200, show_default=True)
@click.option("--domain", default=496.0, show_default=True)
@click.option("--epsilon", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True, help="Root seed.")
@click.option("--figures/--no-figures", "render", default=True,
              show_default=True)
def experiment(out_dir, seeds, n, domain, epsilon, seed, render):
    """Generate the jitter x length batch, run the detector, emit reports."""
    from . import plots

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root = np.random.default_rng(seed)
    seed_list = [int(s) for s in root.integers(0, 2**62, size=seeds)]
    specs = stimuli.batch_specs(seed_list, n=n, domain=domain)
    records = [stimuli.generate(s) for s in specs]
    io.write_manifest(out / "manifest.jsonl", records)
    report = harness.run_dataset(records, epsilon=epsilon)
    harness.write_trials_csv(out / "trials.csv", report.trials)
    harness.write_curve_csv(out / "curve.csv", report.curve)
    harness.write_rate_csv(out / "rates.csv", report.rate_by_condition)
    summary = {
        "trials": len(report.trials),
        "skipped": len(report.skipped),
        "bins": list(report.curve.counts),
    }
    (out / "report.json").write_bytes(io.dump_bytes(summary))
    if render:
        plots.plot_binned_curve(report.curve, out / "curve.png")
        plots.plot_rate_by_jitter(report.rate_by_condition, out / "rates.png")
    click.echo(f"wrote {len(report.trials)} trials to {out}")


@main.command("figures")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--figures/--no-figures", "render", default=True,
              show_default=True)
def figures(out_dir, seed, render):
    """Run the figure scenario suite; exit nonzero if any assertion fails."""
    from . import plots

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = harness.figure_suite(seed=seed)
    (out / "report.json").write_bytes(io.dump_bytes(harness.suite_summary(report)))
    if render:
        for scenario in report["scenarios"]:
            for label, (pattern, detections) in scenario.get("scenes", {}).items():
                path = out / f"{scenario['name']}_{label}.png"
                plots.plot_dot_scene(pattern, detections, path,
                                     title=f"{scenario['name']} ({label})")
    for scenario in report["scenarios"]:
        status = "PASS" if scenario["pass"] else "FAIL"
        click.echo(f"{status} {scenario['name']}")
    if not report["pass"]:
        raise click.exceptions.Exit(1)


if __name__ == "__main__":
    main()
