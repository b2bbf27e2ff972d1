"""Generate the ERRORS.md reference document from the error code registry.

Reads every error code and its message from
:data:`nonexp_lab.utility.error.ERROR_MESSAGES`, groups the codes by family
(:data:`nonexp_lab.utility.error.Error_Family`) and writes one Markdown
table per family into ``ERRORS.md`` at the project root.

Usage::

    python tools/generate_errory.py
"""

import os
import sys

current_dir = os.path.dirname(os.path.abspath(__file__))

project_root = os.path.dirname(current_dir)

sys.path.append(project_root)

from nonexp_lab.utility.error import ERROR_MESSAGES, Error_Family

OUTPUT_FILE = os.path.join(project_root, "ERRORS.md")


def render():
    """Return the Markdown text: a header, then one table per error family."""
    lines = ["# Error Codes Reference", "",
             "This is a complete list of all error codes raised by **nonexp_lab**.",
             "Every error carries its code; the CLI prints it and exits with status 2.", ""]
    for digit, family in sorted(Error_Family.items()):
        codes = sorted(c for c in ERROR_MESSAGES if c.startswith(digit))
        if not codes:
            continue
        lines += [f"## {digit}xxx {family}", "", "| Code | Message |", "| :--- | :--- |"]
        for code in codes:
            clean_message = ERROR_MESSAGES[code].strip().replace("|", "\\|")
            lines.append(f"| **{code}** | {clean_message} |")
        lines.append("")
    return "\n".join(lines)


def main():
    print(f"Writing {OUTPUT_FILE}...")
    with open(OUTPUT_FILE, "w", encoding="utf-8") as f:
        f.write(render())
    print(f"Done: {len(ERROR_MESSAGES)} codes.")


if __name__ == "__main__":
    main()
