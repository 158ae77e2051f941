from __future__ import annotations

from pathlib import Path
from typing import Any

from jinja2 import Environment, PackageLoader, select_autoescape


def _template_env() -> Environment:
    return Environment(
        loader=PackageLoader("diatomiq", "templates"),
        autoescape=select_autoescape(["html", "xml"]),
        trim_blocks=True,
        lstrip_blocks=True,
    )


def _fmt(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.3e}"
    return str(value)


def render_report(summary: dict[str, Any]) -> str:
    """Markdown text for a gate-check summary."""
    env = _template_env()
    env.filters["fmt"] = _fmt
    ctx = {
        "backend": summary["backend"],
        "datetime_utc": summary["datetime_utc"],
        "system": summary.get("system", {}),
        "checks": summary["checks"],
        "all_passed": summary["all_passed"],
        "pass_ratio": summary["pass_ratio"],
    }
    return env.get_template("gatecheck.md.j2").render(**ctx)


def generate_report(summary: dict[str, Any], md_out: str | Path) -> Path:
    """Render the Markdown gate-check report.

    Parameters
    ----------
    summary : dict
        JSON-style summary from `aggregate_checks_to_summary`.
    md_out : str | Path
        Markdown output path; parent directories are created.
    """
    path = Path(md_out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(summary))
    return path
