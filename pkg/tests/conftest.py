"""Shared test fixtures: random score-matrix generation and the golden
parser fixtures (a miniature UCI-HAR tree, WISDM raw text, and an ARFF
file with hand-checked expected values).
"""

import random

import numpy as np
import pytest

import oracles
from fusekit.fusion import ScoreMatrix

# ---------------------------------------------------------------- scores


def make_matrices(seed, j, d, c):
    """Paired inputs: nested-list matrices for the oracle and the same
    float values wrapped as ScoreMatrix for the library."""
    rand = random.Random(seed)
    raw = oracles.random_matrices(rand, j, d, c)
    wrapped = [ScoreMatrix(values=np.array(rows, dtype=np.float64)) for rows in raw]
    return raw, wrapped


@pytest.fixture
def matrices_factory():
    return make_matrices


# --------------------------------------------------------- UCI-HAR tree

UCIHAR_TRAIN_X = [
    [0.1, -0.2, 0.3, 0.4],
    [1.5, 2.5, -3.5, 0.0],
    [-0.25, 0.75, 0.5, -1.0],
]
UCIHAR_TRAIN_Y = [1, 2, 6]  # archive labels are 1-based
UCIHAR_TEST_X = [
    [2.0, -1.0, 0.25, 0.125],
    [0.0, 0.5, -0.5, 1.0],
]
UCIHAR_TEST_Y = [3, 1]


def inertial_value(channel, row, col):
    # Deterministic formula so expected values need no stored literals.
    return channel + row / 10.0 + col / 1000.0


def _write_matrix(path, rows):
    path.write_text(
        "\n".join(" ".join(repr(float(v)) for v in row) for row in rows) + "\n",
        encoding="utf-8",
    )


def build_ucihar_tree(root, n_channels=9, width=128):
    """Write a 3-train/2-test miniature of the archive layout."""
    from fusekit.datasets import UCIHAR_SIGNALS

    for split, X, y in (
        ("train", UCIHAR_TRAIN_X, UCIHAR_TRAIN_Y),
        ("test", UCIHAR_TEST_X, UCIHAR_TEST_Y),
    ):
        d = root / split
        d.mkdir(parents=True, exist_ok=True)
        _write_matrix(d / f"X_{split}.txt", X)
        (d / f"y_{split}.txt").write_text(
            "\n".join(str(v) for v in y) + "\n", encoding="utf-8"
        )
        signal_dir = d / "Inertial Signals"
        signal_dir.mkdir(exist_ok=True)
        for k, signal in enumerate(UCIHAR_SIGNALS[:n_channels]):
            rows = [
                [inertial_value(k, i, j) for j in range(width)]
                for i in range(len(y))
            ]
            _write_matrix(signal_dir / f"{signal}_{split}.txt", rows)
    return root


@pytest.fixture
def ucihar_root(tmp_path):
    return build_ucihar_tree(tmp_path / "ucihar")


# --------------------------------------------------------- WISDM raw

WISDM_GOOD_LINES = [
    "33,Jogging,49105962326000,-0.69,12.68,0.5;",
    "33,Jogging,49106062271000,5.01,11.26,0.95;",
    "17,Walking,49106112167000,4.9,10.88,-0.08",
    "12,Upstairs,49106222305000,0.25,9.81,1.5;",
    "5,Standing,49106332290000,0.0,9.81,0.3;",
]
# (user, label index, timestamp, x, y, z) for the lines above.
WISDM_EXPECTED = [
    (33, 1, 49105962326000, -0.69, 12.68, 0.5),
    (33, 1, 49106062271000, 5.01, 11.26, 0.95),
    (17, 0, 49106112167000, 4.9, 10.88, -0.08),
    (12, 2, 49106222305000, 0.25, 9.81, 1.5),
    (5, 5, 49106332290000, 0.0, 9.81, 0.3),
]


def wisdm_filler_lines(count, start=0):
    """Well-formed lines to pad a file below the malformed-rate limit."""
    lines = []
    for i in range(start, start + count):
        lines.append(
            f"{i % 30 + 1},Walking,{49106000000000 + i},"
            f"{(i % 7) - 3}.5,{9 + (i % 3)}.0,{(i % 5)}.25;"
        )
    return lines


@pytest.fixture
def wisdm_raw_file(tmp_path):
    path = tmp_path / "wisdm_raw.txt"
    path.write_text("\n".join(WISDM_GOOD_LINES) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------- ARFF

ARFF_TEXT = """\
% hand-written parser fixture
@relation wisdm_like

@attribute "UNIQUE_ID" numeric
@attribute user numeric
@attribute XAVG numeric
@attribute YAVG numeric
@attribute class {Walking,Jogging}

@data
1,33,0.5,1.25,Walking
2,17,?,2.5,Jogging
3,33,1.5,?,Walking
"""
# Feature columns exclude the two identifier attributes.
ARFF_EXPECTED_FEATURES = [[0.5, 1.25], [float("nan"), 2.5], [1.5, float("nan")]]
ARFF_EXPECTED_LABELS = [0, 1, 0]
ARFF_FEATURE_NAMES = ("XAVG", "YAVG")
ARFF_CLASS_NAMES = ("Walking", "Jogging")


@pytest.fixture
def arff_file(tmp_path):
    path = tmp_path / "fixture.arff"
    path.write_text(ARFF_TEXT, encoding="utf-8")
    return path
