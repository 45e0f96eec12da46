"""Run reports: JSON/CSV serialization with atomic file writes.

Every report embeds the canonical config mapping that produced it, so a
report is a reproducible record: feeding the echoed config back through
the loader reruns the exact same experiment (same seed, same streams,
same counts).
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

from .engine import CoincidenceResult, QuadResult
from .inequalities import (
    InequalityReport,
    ResidualResult,
    ScanResult,
    StatisticResult,
    inequality_report,
)
from .stats import Estimate

SCHEMA_PREFIX = "bellmc"
SCHEMA_VERSION = 1


def _atomic_write(path: str, text: str) -> None:
    """Write text and rename into place, so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bellmc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def write_csv(path: str, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def estimate_payload(est: Estimate) -> dict:
    return {"value": est.value, "se": est.se}


def statistic_payload(result: StatisticResult) -> dict:
    return {
        "name": result.name,
        "value": result.statistic.value,
        "se": result.statistic.se,
        "bound": result.bound,
        "z": result.z,
    }


def pair_payload(result: CoincidenceResult) -> dict:
    return {
        "alpha": result.alpha,
        "beta": result.beta,
        "model_1": result.model_1,
        "model_2": result.model_2,
        "seed": result.seed,
        "label": result.label,
        "counts": result.counts(),
        "probabilities": {
            "p1": estimate_payload(result.p1),
            "p2": estimate_payload(result.p2),
            "joint": estimate_payload(result.p_joint),
            "equal": estimate_payload(result.p_equal),
        },
    }


def inequality_payload(report: InequalityReport) -> dict:
    return {
        "quad": {
            "alpha": report.quad.alpha,
            "alpha_prime": report.quad.alpha_prime,
            "beta": report.quad.beta,
            "beta_prime": report.quad.beta_prime,
        },
        "model_1": report.model_1,
        "model_2": report.model_2,
        "n_per_pair": report.n_per_pair,
        "statistics": {s.name: statistic_payload(s) for s in report.all_statistics()},
    }


def quad_payload(result: QuadResult) -> dict:
    report = inequality_report(result)
    singles = {
        "p1_alpha": estimate_payload(result.p1_alpha),
        "p1_alpha_prime": estimate_payload(result.p1_alpha_prime),
        "p2_beta": estimate_payload(result.p2_beta),
        "p2_beta_prime": estimate_payload(result.p2_beta_prime),
    }
    return {
        "pairs": {
            "ab": pair_payload(result.pair_ab),
            "abp": pair_payload(result.pair_abp),
            "apb": pair_payload(result.pair_apb),
            "apbp": pair_payload(result.pair_apbp),
        },
        "singles": singles,
        "inequalities": inequality_payload(report),
    }


def residual_payload(result: ResidualResult) -> dict:
    return {
        "quad": {
            "alpha": result.quad.alpha,
            "alpha_prime": result.quad.alpha_prime,
            "beta": result.quad.beta,
            "beta_prime": result.quad.beta_prime,
        },
        "n_events": result.n_events,
        "impact_dependent": result.impact_dependent,
        "residual": estimate_payload(result.estimate),
    }


def scan_payload(result: ScanResult) -> dict:
    return {
        "statistic": result.statistic,
        "mode": result.mode,
        "grid_step": result.grid_step,
        "budget": result.budget,
        "evaluations": result.evaluations,
        "best_quad": {
            "alpha": result.best_quad.alpha,
            "alpha_prime": result.best_quad.alpha_prime,
            "beta": result.best_quad.beta,
            "beta_prime": result.best_quad.beta_prime,
        },
        "best": statistic_payload(result.best),
    }


SCAN_CSV_HEADER = ["alpha", "alpha_prime", "beta", "beta_prime", "value", "se"]


def scan_rows(result: ScanResult):
    for row in result.rows:
        yield [repr(row.quad[0]), repr(row.quad[1]), repr(row.quad[2]),
               repr(row.quad[3]), repr(row.value), repr(row.se)]


HIST_CSV_HEADER = ["bin_x_center", "bin_y_center", "frequency"]


def hist_rows(frequencies, x_edges, y_edges):
    x_centers = 0.5 * (x_edges[:-1] + x_edges[1:])
    y_centers = 0.5 * (y_edges[:-1] + y_edges[1:])
    for i, xc in enumerate(x_centers):
        for j, yc in enumerate(y_centers):
            yield [repr(float(xc)), repr(float(yc)), repr(float(frequencies[i, j]))]


def report_document(kind: str, config_mapping: dict | None, backend: str, body: dict) -> dict:
    """Wrap a payload with schema, backend, and config-echo metadata."""
    document = {
        "schema": f"{SCHEMA_PREFIX}/{kind}/{SCHEMA_VERSION}",
        "backend": backend,
    }
    if config_mapping is not None:
        document["config"] = config_mapping
    document.update(body)
    return document
