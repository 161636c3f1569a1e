"""AA/AB hypothesis testing over sketch-set dissimilarities, plus reporting.

For one image the procedure compares a baseline distribution of dissimilarity
values (AA: two independent sketch sets collected under the same 20 s limit)
against a treatment distribution (AB: the same anchor set against a set
collected under a different limit).  A significant difference means drawers
re-prioritized which shapes they drew first under the changed time limit.

Per-image outcomes aggregate into per-category rejection counts and rates,
emitted as CSV and as an aligned text table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metric import SetDissimilarity, set_dissimilarity
from .strokes import DEFAULT_SPACING, Sketch

DEFAULT_ALPHA = 0.05

_BETACF_MAX_ITER = 400
_BETACF_EPS = 1e-15
_FPMIN = 1e-300


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) evaluated by the continued-fraction expansion.

    Uses the symmetry transform so the continued fraction always converges
    fast; absolute accuracy is around 1e-14 for the parameter ranges a t-test
    produces, comfortably below the 1e-10 target.
    """
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return float(x)
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betacf(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        coef = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coef * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + coef / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coef * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + coef / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_value: float
    reject: bool
    degenerate: bool = False


def students_t_test(sample_a: Sequence[float], sample_b: Sequence[float],
                    alpha: float = DEFAULT_ALPHA, welch: bool = False) -> TTestResult:
    """Two-sample t test of equal means, two-sided.

    The default is the pooled-variance form; ``welch=True`` switches to the
    unequal-variance form with Welch-Satterthwaite degrees of freedom.  Two
    constant samples are degenerate: equal constants give t = 0 and p = 1,
    unequal constants report a rejection with p = 0 and the ``degenerate``
    flag set.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    n1, n2 = a.size, b.size
    m1, m2 = float(a.mean()), float(b.mean())
    v1 = float(a.var(ddof=1))
    v2 = float(b.var(ddof=1))

    if v1 == 0.0 and v2 == 0.0:
        if m1 == m2:
            df = float(n1 + n2 - 2)
            return TTestResult(0.0, df, 1.0, False, degenerate=True)
        t = math.inf if m1 > m2 else -math.inf
        return TTestResult(t, float(n1 + n2 - 2), 0.0, True, degenerate=True)

    if welch:
        se2 = v1 / n1 + v2 / n2
        df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    else:
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se2 = sp2 * (1.0 / n1 + 1.0 / n2)
    t = (m1 - m2) / math.sqrt(se2)
    p = t_two_sided_p(t, df)
    return TTestResult(t, df, p, p < alpha)


@dataclass(frozen=True)
class ImageTestResult:
    """Outcome of the AA-vs-AB comparison for one image."""

    image_id: str
    comparison: str  # "20v10", "20v40", or "custom"
    aa: SetDissimilarity
    ab: SetDissimilarity
    t_stat: float
    df: float
    p_value: float
    reject: bool


def _comparison_label(anchor: Sequence[Sketch], other: Sequence[Sketch]) -> str:
    anchor_limits = {s.time_limit_s for s in anchor}
    other_limits = {s.time_limit_s for s in other}
    if anchor_limits == {20}:
        if other_limits == {10}:
            return "20v10"
        if other_limits == {40}:
            return "20v40"
    return "custom"


def run_image_test(image_id: str,
                   set_20_primary: Sequence[Sketch],
                   set_20_baseline: Sequence[Sketch],
                   set_other: Sequence[Sketch],
                   image_w: float, image_h: float,
                   alpha: float = DEFAULT_ALPHA,
                   welch: bool = False,
                   comparison: str | None = None,
                   spacing: float = DEFAULT_SPACING) -> ImageTestResult:
    """Test one image for re-prioritization between two time limits.

    The primary anchor set enters both comparisons: AA pits it against the
    second set collected under the same limit, AB against the set from the
    other limit.  The t test then asks whether the AB dissimilarities differ
    from the AA baseline.
    """
    try:
        aa = set_dissimilarity(set_20_primary, set_20_baseline, image_w, image_h, spacing)
    except ValueError as e:
        raise type(e)(f"AA sets (primary vs baseline) for image '{image_id}': {e}") from e
    try:
        ab = set_dissimilarity(set_20_primary, set_other, image_w, image_h, spacing)
    except ValueError as e:
        raise type(e)(f"AB sets (primary vs other) for image '{image_id}': {e}") from e
    tt = students_t_test(aa.value_array(), ab.value_array(), alpha=alpha, welch=welch)
    label = comparison or _comparison_label(set_20_primary, set_other)
    return ImageTestResult(image_id, label, aa, ab,
                           tt.t, tt.df, tt.p_value, tt.reject)


@dataclass(frozen=True)
class CategoryRow:
    category: str
    image_count: int
    rejections: int
    rejection_rate: float


@dataclass(frozen=True)
class CategoryReport:
    rows: tuple[CategoryRow, ...]
    total: CategoryRow


def aggregate_categories(results: Iterable[ImageTestResult],
                         categories: Mapping[str, str]) -> CategoryReport:
    """Count rejections per image category.

    ``categories`` maps image_id to category name (see ImageManifest).  Rows
    come back sorted by category; the ``total`` row spans all tested images.
    """
    counts: dict[str, list[int]] = {}
    n_total = 0
    n_reject = 0
    for res in results:
        if res.image_id not in categories:
            raise ValueError(f"image '{res.image_id}' is not in the manifest")
        cat = categories[res.image_id]
        slot = counts.setdefault(cat, [0, 0])
        slot[0] += 1
        slot[1] += int(res.reject)
        n_total += 1
        n_reject += int(res.reject)
    rows = tuple(
        CategoryRow(cat, n, r, r / n)
        for cat, (n, r) in sorted(counts.items())
    )
    total = CategoryRow("all", n_total, n_reject,
                        (n_reject / n_total) if n_total else 0.0)
    return CategoryReport(rows, total)


def report_csv(report: CategoryReport) -> str:
    lines = ["category,image_count,rejections,rejection_rate"]
    for row in (*report.rows, report.total):
        lines.append(f"{row.category},{row.image_count},{row.rejections},"
                     f"{row.rejection_rate!r}")
    return "\n".join(lines) + "\n"


def report_text(report: CategoryReport) -> str:
    """Aligned table of per-category rejection counts and rates."""
    rows = [*report.rows, report.total]
    width = max([len("Category")] + [len(r.category) for r in rows]) + 2
    header = f"{'Category':<{width}}{'Images':>8}{'Rejections':>12}{'Rate':>8}"
    lines = [header, "-" * len(header)]
    for row in rows:
        rate = f"{round(row.rejection_rate, 2):g}"
        lines.append(f"{row.category:<{width}}{row.image_count:>8}"
                     f"{row.rejections:>12}{rate:>8}")
    return "\n".join(lines) + "\n"
