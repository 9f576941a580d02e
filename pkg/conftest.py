def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            name = nodeid.split("::")[-1]
            if not name.startswith("test_criterion_"):
                continue
            if outcomes.get(name) == "failed":
                continue
            outcome = getattr(rep, "outcome", status)
            if outcome == "failed" or name not in outcomes:
                outcomes[name] = outcome
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    labels = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for name in sorted(outcomes):
        terminalreporter.write_line(f"{name}: {labels.get(outcomes[name], outcomes[name].upper())}")
