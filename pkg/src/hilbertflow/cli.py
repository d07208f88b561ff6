"""Command-line front end: group ingestion, analysis pipelines, reproducible
CSV/JSON outputs.

Exit codes: 0 success; 2 malformed group file or unknown word label; 3 empty
biproximal sample; 4 certificate search exhaustion; 5 fit-window failure.
Outputs carry the group hash and config hash; reruns with the same inputs are
byte-identical.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from hilbertflow import boundary as boundary_mod
from hilbertflow import certify as certify_mod
from hilbertflow import domainbuild, spectra
from hilbertflow.boundary import FitWindowError
from hilbertflow.certify import SearchExhausted
from hilbertflow.domainbuild import EmptySampleError
from hilbertflow.groups import (GroupFileError, group_hash, load_group,
                                parse_word, word_label)
from hilbertflow.projlin import GeometryError

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_EMPTY_SAMPLE = 3
EXIT_EXHAUSTED = 4
EXIT_FIT_WINDOW = 5

OUT_ENV = "HILBERTFLOW_OUT"


@dataclass(frozen=True)
class RunConfig:
    command: str
    group: str
    max_len: int = 8
    tol: float = 1e-8
    threshold: float = 1e-8
    window_min: float = 1e-5
    window_max: float = 1e-2
    seed: int = 0
    words: str = "auto"
    out: str = "."

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(doc: dict) -> "RunConfig":
        return RunConfig(**doc)

    def public_json(self) -> dict:
        """Config as recorded in outputs: no paths, so reruns match
        byte for byte regardless of where they write."""
        return {k: v for k, v in self.to_json().items()
                if k not in ("out", "group")}

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.public_json(), sort_keys=True).encode()
        ).hexdigest()[:16]

    def validate(self):
        if self.max_len < 0:
            raise GeometryError("max word length must be >= 0")
        for name in ("tol", "threshold", "window_min", "window_max"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"{name} must be positive")


def _provenance(cfg: RunConfig, ghash: str) -> dict:
    return {"config_hash": cfg.config_hash(), "group_hash": ghash}


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_analyze(cfg: RunConfig) -> int:
    group = load_group(cfg.group)
    ghash = group_hash(group)
    report = spectra.simplicity_report(group, cfg.max_len, cfg.tol)
    out = _outdir(cfg)
    prov = _provenance(cfg, ghash)
    spectra.spectra_to_csv(report, group, out / "spectra.csv", prov)
    spectra.report_to_json_file(report, group, out / "summary.json",
                                {**prov, "config": cfg.public_json()})
    gap = "n/a" if report.min_gap is None else f"{report.min_gap:.3e}"
    emax = "n/a" if report.max_abs_eta is None else f"{report.max_abs_eta:.3e}"
    print(f"analyze: {report.n_biproximal}/{report.n_words} biproximal, "
          f"{report.n_loxodromic} loxodromic, simple fraction "
          f"{report.fraction_simple:.3f}, min gap {gap}, max |eta| {emax}, "
          f"eta nonzero fraction {report.fraction_eta_nonzero:.3f}")
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    group = load_group(cfg.group)
    ghash = group_hash(group)
    out = _outdir(cfg)
    try:
        theta = certify_mod.find_loxodromic(group, max(cfg.max_len, 1), cfg.tol)
        cert = certify_mod.ams_search(group, theta, cfg.max_len, cfg.threshold)
    except SearchExhausted as exc:
        doc = {"error": str(exc), **_provenance(cfg, ghash)}
        if exc.best is not None:
            doc["best_word"] = list(exc.best[0])
            doc["best_margin"] = exc.best[1]
        with open(out / "certificate_failure.json", "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
        print(f"certify: exhausted ({exc})", file=sys.stderr)
        return EXIT_EXHAUSTED
    ok = certify_mod.verify_certificate(group, cert)
    doc = cert.to_json()
    doc.update(_provenance(cfg, ghash))
    doc["verified"] = bool(ok)
    with open(out / "certificate.json", "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
    print(f"certify: theta={word_label(group, cert.theta)} "
          f"z={word_label(group, cert.z)} min_margin={cert.min_margin:.3e} "
          f"verified={ok}")
    return EXIT_OK if ok else EXIT_EXHAUSTED


def cmd_boundary(cfg: RunConfig) -> int:
    group = load_group(cfg.group)
    ghash = group_hash(group)
    out = _outdir(cfg)
    prov = _provenance(cfg, ghash)
    sample = domainbuild.limit_set_sample(group, cfg.max_len)
    domainbuild.limit_set_to_csv(sample, out / "limit_set.csv", group, prov)
    try:
        hull = domainbuild.orbit_hull_domain(
            group, sample.points.mean(axis=0), cfg.max_len, sample=sample)
        from hilbertflow import domains as domains_mod

        hull_doc = domains_mod.domain_to_json(hull)
        hull_doc.update(prov)
        with open(out / "hull_domain.json", "w") as fh:
            json.dump(hull_doc, fh, indent=1, sort_keys=True)
    except GeometryError:
        pass  # degenerate hulls are not fatal for the fits
    if cfg.words == "auto":
        theta = certify_mod.find_loxodromic(group, cfg.max_len, cfg.tol)
        words = [theta.word]
    else:
        words = [parse_word(group, w) for w in cfg.words.split(",") if w.strip()]
    window = (cfg.window_min, cfg.window_max)
    failures = []
    for word in words:
        label = word_label(group, word)
        try:
            report = boundary_mod.alpha_compare(group, sample, word,
                                                window=window, tol=cfg.tol)
        except (FitWindowError, GeometryError) as exc:
            failures.append({"word": label, "error": str(exc)})
            continue
        boundary_mod.report_to_json_file(report, out / f"alpha_{label}.json",
                                         {**prov, "config": cfg.public_json()})
        boundary_mod.samples_to_csv(report, out / f"graph_{label}.csv", prov)
        fitted = ", ".join(f"{a:.4f}" for a in report.alpha_fitted)
        pred = ", ".join(f"{a:.4f}" for a in report.alpha_predicted)
        print(f"boundary: word={label} alpha_fitted=[{fitted}] "
              f"alpha_predicted=[{pred}]")
    if failures:
        with open(out / "boundary_failures.json", "w") as fh:
            json.dump({"failures": failures, **prov}, fh, indent=1,
                      sort_keys=True)
        for f in failures:
            print(f"boundary: fit failed for {f['word']}: {f['error']}",
                  file=sys.stderr)
        return EXIT_FIT_WINDOW
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hilbertflow",
        description="Hilbert-geometry spectra, typicality certificates, and "
                    "boundary exponents for matrix groups")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("analyze", "per-word spectrum table and summary"),
                        ("certify", "search and verify a typicality certificate"),
                        ("boundary", "boundary exponent fits at fixed points")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--group", required=True, help="group JSON file")
        p.add_argument("--max-len", type=int, default=8, dest="max_len")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--threshold", type=float, default=1e-8)
        p.add_argument("--window-min", type=float, default=1e-5,
                       dest="window_min")
        p.add_argument("--window-max", type=float, default=1e-2,
                       dest="window_max")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--words", default="auto",
                       help='comma-separated word labels, or "auto"')
        p.add_argument("--out", default=os.environ.get(OUT_ENV, "."),
                       help=f"output directory (default ${OUT_ENV} or .)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, group=args.group,
                    max_len=args.max_len, tol=args.tol,
                    threshold=args.threshold, window_min=args.window_min,
                    window_max=args.window_max, seed=args.seed,
                    words=args.words, out=args.out)
    try:
        cfg.validate()
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "certify":
            return cmd_certify(cfg)
        return cmd_boundary(cfg)
    except GroupFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except EmptySampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_SAMPLE
    except FitWindowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT_WINDOW
    except SearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
