"""Repeated, gated evaluation of the model variants and report serialization."""
from __future__ import annotations

import csv
import io
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .cv import CVConfig, sample_gated_split
from .data import Dataset
from .exceptions import DegeneratePartitionWarning
from .fusion import FusionConfig, Variant, predict_fusion, train_variant
from .metrics import METRIC_NAMES, aggregate, evaluate, overlap

SUMMARY_COLUMNS = ("model",) + tuple(f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "std"))

# Venn of correctly classified test samples: clinical, image, sequential fusion.
OVERLAP_VARIANTS = (Variant.PRIOR_ONLY, Variant.IMAGE_ONLY, Variant.SEQUENTIAL)


def parse_variants(variants: Iterable) -> tuple:
    if isinstance(variants, str):
        variants = [v for v in variants.split(",") if v.strip()]
    out = []
    for v in variants:
        v = Variant(v.strip().upper() if isinstance(v, str) else v)
        if v not in out:
            out.append(v)
    if not out:
        raise ValueError("no variants requested")
    return tuple(sorted(out, key=lambda v: v.value))


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    repeats: tuple
    aggregate: dict
    overlap_summary: dict

    def to_dict(self) -> dict:
        return {"config": self.config, "repeats": list(self.repeats),
                "aggregate": self.aggregate, "overlap": self.overlap_summary}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        for key in ("config", "repeats", "aggregate", "overlap"):
            if key not in d:
                raise ValueError(f"report is missing key {key!r}")
        return cls(d["config"], tuple(d["repeats"]), d["aggregate"], d["overlap"])

    def summary_rows(self) -> list:
        rows = []
        for code in sorted(self.aggregate):
            agg = self.aggregate[code]
            row = {"model": agg["model"]}
            for m in METRIC_NAMES:
                row[f"{m}_mean"] = agg[m]["mean"]
                row[f"{m}_std"] = agg[m]["std"]
            rows.append(row)
        return rows

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.summary_rows():
            writer.writerow({k: (v if k == "model" else repr(float(v))) for k, v in row.items()})
        return buf.getvalue()

    def table(self) -> str:
        head = f"{'model':<20}" + "".join(f"{m:>20}" for m in METRIC_NAMES)
        lines = [head, "-" * len(head)]
        for row in self.summary_rows():
            cells = "".join(f"{row[m + '_mean']:>12.3f} ±{row[m + '_std']:<6.3f}" for m in METRIC_NAMES)
            lines.append(f"{row['model']:<20}{cells}")
        return "\n".join(lines)

    def overlap_table(self) -> str:
        lines = []
        for rec in self.repeats:
            ov = rec.get("overlap")
            if not ov:
                continue
            regions = ov["regions"]
            cells = ", ".join(f"{k}={v}" for k, v in regions.items())
            lines.append(f"repeat {rec['repeat']}: n={ov['n']} sum={sum(regions.values())} | {cells}")
        for name, regions in self.overlap_summary.items():
            lines.append(f"{name} mean ± std:")
            for k, ms in regions.items():
                lines.append(f"  {k:<50} {ms['mean']:8.2f} ± {ms['std']:.2f}")
        return "\n".join(lines)


def _run_repeat(dataset, cv_config, fusion_config, variants, repeat):
    split, attempts = sample_gated_split(dataset, cv_config, repeat)
    y_test = dataset.labels[split.test]
    record = {
        "repeat": repeat,
        "attempts": attempts,
        "split": split.to_dict(),
        "sizes": {k: int(len(v)) for k, v in split.parts().items()},
        "test_positives": int(y_test.sum()),
        "variants": {},
    }
    predictions = {}
    for v in variants:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneratePartitionWarning)
            model = train_variant(v, dataset, split, fusion_config)
        _, pred = predict_fusion(model, dataset, split.test)
        predictions[v] = pred
        entry = {"model": v.label, "metrics": evaluate(y_test, pred).as_dict()}
        if v is Variant.SEQUENTIAL:
            entry["chosen_weighting"] = model.chosen_weighting()
            entry["partition_sizes"] = list(model.partition_sizes)
            entry["degenerate_partition"] = model.degenerate_partition
            entry["candidates"] = [c.to_dict() for c in model.candidates]
        record["variants"][v.value] = entry

    venn = [v for v in OVERLAP_VARIANTS if v in predictions]
    if len(venn) >= 2:
        record["overlap"] = overlap(y_test, {v.label: predictions[v] for v in venn}).to_dict()
    if Variant.SEQUENTIAL in predictions and Variant.EARLY in predictions:
        pos = y_test == 1
        record["positive_overlap"] = overlap(
            y_test[pos], {v.label: predictions[v][pos]
                          for v in (Variant.SEQUENTIAL, Variant.EARLY)}).to_dict()
    return record


def _summarize_regions(records, key):
    per_region = {}
    for rec in records:
        if key in rec:
            for region, count in rec[key]["regions"].items():
                per_region.setdefault(region, []).append(count)
    out = {}
    for region, counts in per_region.items():
        mean, std = aggregate(counts)
        out[region] = {"mean": mean, "std": std}
    return out


def run_experiment(dataset: Dataset, cv_config: CVConfig = CVConfig(),
                   fusion_config: FusionConfig = FusionConfig(),
                   variants=("A", "B", "C", "D"), n_jobs: int = 1,
                   extra_config: Optional[dict] = None) -> ExperimentReport:
    """Train and evaluate each variant on ``cv_config.n_repeats`` gated splits.

    Repeats run on ``n_jobs`` threads; every repeat is seeded from its index,
    so the report does not depend on ``n_jobs``.
    """
    variants = parse_variants(variants)

    def job(r):
        return _run_repeat(dataset, cv_config, fusion_config, variants, r)

    repeats = range(cv_config.n_repeats)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            records = list(pool.map(job, repeats))
    else:
        records = [job(r) for r in repeats]

    agg = {}
    for v in variants:
        row = {"model": v.label}
        for m in METRIC_NAMES:
            mean, std = aggregate([rec["variants"][v.value]["metrics"][m] for rec in records])
            row[m] = {"mean": mean, "std": std}
        agg[v.value] = row

    overlap_summary = {}
    for key in ("overlap", "positive_overlap"):
        summary = _summarize_regions(records, key)
        if summary:
            overlap_summary[key] = summary

    config = {"cv": cv_config.to_dict(), "fusion": fusion_config.to_dict(),
              "variants": [v.value for v in variants], "n_samples": dataset.n}
    if extra_config:
        config.update(extra_config)
    return ExperimentReport(config, tuple(records), agg, overlap_summary)


def load_report(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return ExperimentReport.from_dict(json.load(fh))


def write_report(report: ExperimentReport, out_dir) -> tuple:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "summary.csv").write_text(report.summary_csv(), encoding="utf-8")
    return out / "report.json", out / "summary.csv"


def mean_metric(report: ExperimentReport, variant: str, metric: str) -> float:
    return float(np.mean([rec["variants"][variant]["metrics"][metric] for rec in report.repeats]))
