import copy

import pytest

from indoor_noma.scenario import scenario_from_dict

# 4 m x 3 m room, a wall at column 3 with a gap in the top row
TINY = {
    "name": "tiny",
    "grid": {"n_x": 8, "n_y": 6, "cell_size": 0.5},
    "obstacles": [{"cells": [[3, 0], [3, 4]], "z": [0.0, 2.5]}],
    "aps": [
        {"id": "ap", "role": "serving", "position": [0.5, 1.5, 2.0], "tx_power_dbm": 20},
        {"id": "intf", "role": "interferer", "position": [3.5, 1.5, 2.0], "tx_power_dbm": -5},
    ],
    "irs": [
        {"start": [0.75, 0.75], "destination": [3.25, 0.75]},
        {"start": [0.75, 2.25], "destination": [1.45, 2.25]},
    ],
    "link": {"t_total": 50},
}


@pytest.fixture
def tiny_doc():
    return copy.deepcopy(TINY)


@pytest.fixture
def tiny(tiny_doc):
    return scenario_from_dict(tiny_doc)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
