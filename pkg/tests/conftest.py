def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=int):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"CRITERION {key}: {'PASS' if ok else 'FAIL'}  {detail}")
