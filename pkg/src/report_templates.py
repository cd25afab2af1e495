"""
Text renderings of command reports using Jinja2.
Bigraded dimension tables go through a pandas pivot (rows i, columns j).
"""

from jinja2 import Template

from models import BigradedDims, CheckItem, Report

# ============================================================================
# REPORT HEADER AND CHECK ITEMS
# ============================================================================

REPORT_TEMPLATE = Template("""koszul-fans {{ engine_version }}: {{ command }}
fan: {{ fan or "-" }}
input sha256: {{ input_sha256 }}
{% if timing is not none %}time: {{ "%.3f"|format(timing) }} s
{% endif %}
{% for item in items %}
[{{ "PASS" if item.passed else "FAIL" }}] {{ item.check }}: {{ item.subject }}{% if item.detail %} ({{ item.detail }}){% endif %}
{% endfor %}
{% for name, table in tables %}
== {{ name }} ==
{{ table }}
{% endfor %}
{{ passed_count }}/{{ items|length }} checks passed
""")


# ============================================================================
# DIMENSION TABLES
# ============================================================================

DIMS_TEMPLATE = Template("""{% if empty %}(zero){% else %}{{ frame }}{% endif %}""")


# ============================================================================
# TEMPLATE HELPERS
# ============================================================================


def render_dims(rows: list[list[int]]) -> str:
    """
    Render a table stored as [u, v, dim] rows.

    Args:
        rows: Doubled bidegrees with dimensions, as produced by BigradedDims.to_rows

    Returns:
        Pivot table text, or "(zero)" for an empty table
    """
    dims = BigradedDims.from_counts({(u, v): d for u, v, d in rows})
    return DIMS_TEMPLATE.render(empty=dims.is_zero, frame=dims.to_frame().to_string())


def _is_dims_row(row) -> bool:
    return isinstance(row, list) and len(row) == 3 and all(isinstance(x, int) and not isinstance(x, bool) for x in row)


def _flatten_tables(tables: dict, prefix: str = "") -> list[tuple[str, str]]:
    rendered = []
    for name in sorted(tables):
        value = tables[name]
        key = f"{prefix}{name}"
        if isinstance(value, dict):
            rendered.extend(_flatten_tables(value, f"{key} / "))
        elif isinstance(value, list) and all(_is_dims_row(row) for row in value):
            rendered.append((key, render_dims(value)))
        else:
            rendered.append((key, str(value)))
    return rendered


def render_report(report: Report) -> str:
    """
    Render a report for the terminal.

    Args:
        report: Command report

    Returns:
        Rendered text
    """
    items: list[CheckItem] = report.items
    return REPORT_TEMPLATE.render(
        engine_version=report.engine_version,
        command=" ".join(report.command),
        fan=report.fan,
        input_sha256=report.input_sha256,
        timing=report.timing_seconds,
        items=items,
        tables=_flatten_tables(report.tables),
        passed_count=sum(item.passed for item in items),
    )
