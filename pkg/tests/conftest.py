from __future__ import annotations

from collections import OrderedDict

CRITERIA = OrderedDict(
    [
        (1, "worked examples bit-exact on every variant, with pre-normalization kQ/eQ"),
        (2, "iteration/latency table for n = 16, 32, 64"),
        (3, "exhaustive oracle equivalence at n = 8 and n = 10, all 11 configurations"),
        (4, "10^6 random pairs per width (16, 32, 64) per configuration, edge cases injected"),
        (5, "no residual-bound violations across the exhaustive runs"),
        (6, "on-the-fly conversion on 10^6 random digit strings per radix"),
        (7, "scaled divisor range for every fraction; scaled == unscaled radix-4 results"),
        (8, "sign/zero lookahead: exhaustive 8-bit plus 10^7 random wide pairs"),
        (9, "radix-4 table containment and stable frozen-table hash"),
    ]
)

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    nums = [v for k, v in report.user_properties if k == "criterion"]
    if not nums:
        return
    if report.when == "call" or not report.passed:
        _outcomes.setdefault(nums[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num, title in CRITERIA.items():
        runs = _outcomes.get(num)
        status = "NOT RUN" if not runs else ("PASS" if all(runs) else "FAIL")
        terminalreporter.write_line(f"criterion {num}: {status:<7} {title}")
