"""One-line verdicts for the acceptance criteria, echoed in the pytest summary."""
LINES = []


def report(n, title, ok, detail=""):
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    LINES.append(line)
    print(line)
    return ok
