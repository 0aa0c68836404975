"""Plot-ready report files and the hashed manifest that lists them."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import RegressionExperiment, SweepResult, VarianceCurve

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"


@dataclass
class ReportInputs:
    sweep: SweepResult | None = None
    variance: VarianceCurve | None = None
    projection: list | None = None
    regressions: list[RegressionExperiment] = field(default_factory=list)


def _num(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _sweep_files(s: SweepResult):
    rows = [(d, clf, _num(s.accuracy[i, j])) for i, d in enumerate(s.dims) for j, clf in enumerate(s.classifiers)]
    yield "sweep_accuracy.csv", _csv_text(["dim", "classifier", "accuracy"], rows)
    if s.chosen is None:
        return
    selection = {
        "selected_dimension": s.chosen,
        "epsilon": s.epsilon,
        "seed": s.seed,
        "mean_accuracy": {str(d): m for d, m in s.mean_accuracy().items()},
    }
    yield "sweep_selection.json", json.dumps(selection, indent=2) + "\n"
    for clf, rep in s.reports_at(s.chosen).items():
        labels = list(rep.labels)
        body = [[lab, *row] for lab, row in zip(labels, rep.confusion.tolist())]
        yield f"confusion_{clf}.csv", _csv_text(["true\\predicted", *labels], body)


def _regression_files(r: RegressionExperiment):
    t = r.target
    imp = [(name, _num(score), _num(std), "" if imp is None else _num(imp))
           for name, score, std, imp in r.importance.rows()]
    yield f"importance_{t}.csv", _csv_text(["feature", "importance", "std", "impurity_importance"], imp)
    for which, summary in (("baseline", r.baseline), ("augmented", r.augmented)):
        payload = summary.to_dict()
        payload["joined_rows"] = r.joined_rows
        payload["dropped_rows"] = r.dropped_rows
        yield f"summary_{t}_{which}.json", json.dumps(payload, indent=2, allow_nan=False) + "\n"
        yield f"summary_{t}_{which}.txt", summary.render_text()
    yield f"residuals_{t}.csv", _csv_text(
        ["fitted", "residual"], [(_num(f), _num(e)) for f, e in zip(r.fitted, r.residuals)]
    )


def render(results: ReportInputs) -> dict[str, str]:
    """File name -> text content for every artifact ``results`` can produce."""
    files = {}
    if results.sweep is not None:
        files.update(_sweep_files(results.sweep))
    if results.variance is not None:
        rows = [(m, _num(v)) for m, v in results.variance.points]
        files["variance_curve.csv"] = _csv_text(["components", "cumulative_variance"], rows)
    if results.projection is not None:
        rows = [(t, s, _num(a), _num(b)) for t, s, a, b in results.projection]
        files["sector_projection.csv"] = _csv_text(["ticker", "sector", "pc1", "pc2"], rows)
    for r in results.regressions:
        files.update(_regression_files(r))
    return files


def write_artifacts(results: ReportInputs, out_dir) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = render(results)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    return sorted(files)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, names=None) -> dict:
    """Hash ``names`` (default: every file in ``out_dir``) into ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if names is None:
        names = [p.name for p in out.iterdir() if p.is_file() and p.name != MANIFEST]
    entries = [
        {"path": n, "sha256": sha256_file(out / n), "bytes": (out / n).stat().st_size}
        for n in sorted(names)
    ]
    manifest = {"schema_version": SCHEMA_VERSION, "files": entries}
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def emit_report(results: ReportInputs, out_dir) -> dict:
    """Write every artifact in ``results`` plus a manifest of exactly those files."""
    return write_manifest(out_dir, write_artifacts(results, out_dir))
