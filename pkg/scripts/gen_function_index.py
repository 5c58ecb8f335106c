#!/usr/bin/env python3
from __future__ import annotations

import argparse
import ast
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DOC_PATH = ROOT / "docs" / "FUNCTION_INDEX.md"
PACKAGE = "drift_app"


def package_modules() -> list[Path]:
    modules = sorted((ROOT / PACKAGE).glob("*.py"))
    return [Path("drift_cli.py")] + [path.relative_to(ROOT) for path in modules]


def _summary(node: ast.AST) -> str:
    doc = ast.get_docstring(node)
    if not doc:
        return ""
    return doc.strip().splitlines()[0]


def _entry(name: str, summary: str) -> str:
    return f"- `{name}`" + (f": {summary}" if summary else "")


def parse_module(rel_path: Path) -> tuple[str, list[str], dict[str, list[str]]]:
    tree = ast.parse((ROOT / rel_path).read_text(encoding="utf-8"))
    functions: list[str] = []
    classes: dict[str, list[str]] = {}
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            functions.append(_entry(node.name, _summary(node)))
        elif isinstance(node, ast.ClassDef):
            classes[_entry(node.name, _summary(node))] = [
                child.name for child in node.body if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef))
            ]
    return _summary(tree), functions, classes


def render() -> str:
    lines = [
        "# Function Index",
        "",
        "Generated list of modules, functions, and classes in the analysis package.",
        "",
        "Regenerate with:",
        "",
        "```bash",
        "python scripts/gen_function_index.py",
        "```",
        "",
    ]
    for module in package_modules():
        module_doc, functions, classes = parse_module(module)
        lines.append(f"## `{module.as_posix()}`")
        lines.append("")
        if module_doc:
            lines.append(module_doc)
            lines.append("")
        if functions:
            lines.append("### Functions")
            lines.append("")
            lines.extend(functions)
            lines.append("")
        if classes:
            lines.append("### Classes")
            lines.append("")
            for heading, methods in classes.items():
                lines.append(heading)
                lines.extend(f"  - `{method}`" for method in methods)
            lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def main() -> int:
    parser = argparse.ArgumentParser(description="Regenerate docs/FUNCTION_INDEX.md.")
    parser.add_argument("--check", action="store_true", help="exit 1 if the index is out of date")
    args = parser.parse_args()

    text = render()
    if args.check:
        current = DOC_PATH.read_text(encoding="utf-8") if DOC_PATH.exists() else ""
        if current != text:
            print(f"{DOC_PATH} is out of date; rerun scripts/gen_function_index.py")
            return 1
        return 0
    DOC_PATH.parent.mkdir(parents=True, exist_ok=True)
    DOC_PATH.write_text(text, encoding="utf-8")
    print(f"Wrote {DOC_PATH}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
