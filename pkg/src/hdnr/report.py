"""Structured hypothesis-test reports and their text/JSON renderings."""
from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class TestReport:
    __test__ = False        # not a pytest class despite the name

    test_id: str
    test_name: str
    statistic_name: str
    statistic: float
    p_value: float
    approx_method: str
    params: dict[str, float]
    n: tuple[int, ...]
    p: int
    null_text: str
    alt_text: str
    data_name: str = "group data"


def fmt_number(x: float) -> str:
    """4 decimals for O(1) magnitudes, scientific notation otherwise."""
    if x == 0:
        return "0"
    if 1e-3 <= abs(x) < 1e5:
        return f"{x:.4f}"
    return f"{x:.6e}"


def fmt_pvalue(p: float) -> str:
    return f"{p:.7g}"


def render_text(report: TestReport) -> str:
    label = "{:<33}"
    lines = [
        "Results of Hypothesis Test",
        "--------------------------",
        "",
        label.format("Test name:") + report.test_name,
        "",
        label.format("Null Hypothesis:") + report.null_text,
        "",
        label.format("Alternative Hypothesis:") + report.alt_text,
        "",
        label.format("Data:") + report.data_name,
        "",
    ]
    sizes = [f"n{i + 1} = {ni}" for i, ni in enumerate(report.n)]
    lines.append(label.format("Sample Sizes:") + sizes[0])
    for s in sizes[1:]:
        lines.append(label.format("") + s)
    lines += [
        "",
        label.format("Sample Dimension:") + str(report.p),
        "",
        label.format("Test Statistic:")
        + f"{report.statistic_name} = {fmt_number(report.statistic)}",
        "",
        label.format("Approximation method to the") + report.approx_method,
        f"null distribution of {report.statistic_name}:",
        "",
    ]
    if report.params:
        width = max(len(k) for k in report.params)
        items = list(report.params.items())
        first = f"{items[0][0]:<{width}} = {fmt_number(items[0][1])}"
        lines.append(label.format("Approximation parameter(s):") + first)
        for k, v in items[1:]:
            lines.append(label.format("") + f"{k:<{width}} = {fmt_number(v)}")
        lines.append("")
    lines.append(label.format("P-value:") + fmt_pvalue(report.p_value))
    return "\n".join(lines)


def to_json_dict(report: TestReport) -> dict:
    return {
        "test": report.test_id,
        "statistic": {"name": report.statistic_name,
                      "value": report.statistic},
        "p_value": report.p_value,
        "parameters": dict(report.params),
        "n": list(report.n),
        "p": report.p,
        "method": report.approx_method,
        "null_hypothesis": report.null_text,
        "alternative_hypothesis": report.alt_text,
        "test_name": report.test_name,
    }


def to_json(report: TestReport) -> str:
    # 17 significant digits round-trips IEEE doubles exactly
    return json.dumps(to_json_dict(report), indent=2)
