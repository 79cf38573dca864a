import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import CRITERIA, RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {CRITERIA[n]} ({detail})")
        else:
            terminalreporter.write_line(f"criterion {n}: NOT RUN - {CRITERIA[n]}")
