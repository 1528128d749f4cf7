"""Shared fixtures: the 6x7 movie-ratings worked example, random-context
helpers, and discovery of an optional local MovieLens 100k directory."""

import os
from pathlib import Path

import numpy as np
import pytest

import fcarec as fr

# The six-user, seven-movie rating table used as the golden example
# throughout the suite.  Zeros are unrated cells.
RATINGS_6X7 = np.array([
    [4, 4, 5, 0, 0, 0, 0],
    [5, 5, 3, 4, 3, 0, 0],
    [0, 0, 0, 4, 4, 0, 0],
    [0, 0, 0, 5, 4, 5, 3],
    [0, 0, 0, 0, 0, 5, 5],
    [0, 0, 0, 0, 0, 4, 4],
], dtype=float)

BINARY_6X7 = (RATINGS_6X7 > 0).astype(int)

# Its known exact 3-factor decomposition.
FACTORS_6X7 = [
    ((0, 1), (0, 1, 2)),
    ((1, 2, 3), (3, 4)),
    ((3, 4, 5), (5, 6)),
]

SIGMA_6X7 = (12.62, 10.66, 7.29, 1.64, 0.95, 0.0)

U3_6X7 = np.array([
    [0.31, 0.48, -0.49],
    [0.58, 0.50, 0.03],
    [0.29, 0.00, 0.57],
    [0.57, -0.37, 0.31],
    [0.29, -0.47, -0.43],
    [0.23, -0.37, -0.35],
])


@pytest.fixture
def toy_ctx() -> fr.BooleanContext:
    return fr.BooleanContext.from_dense(BINARY_6X7)


@pytest.fixture
def toy_ratings() -> fr.RatingsMatrix:
    triples = [
        (u + 1, i + 1, int(r))
        for u, row in enumerate(RATINGS_6X7)
        for i, r in enumerate(row) if r > 0
    ]
    return fr.RatingsMatrix.from_triples(triples)


def random_context(rng, max_side=12, densities=(0.1, 0.3, 0.5)):
    """A random nonempty context up to max_side x max_side."""
    while True:
        n = int(rng.integers(1, max_side + 1))
        m = int(rng.integers(1, max_side + 1))
        dense = rng.random((n, m)) < rng.choice(densities)
        if dense.any():
            return fr.BooleanContext.from_dense(dense)


def make_ratings(rng, n_users, n_items, density=0.3):
    """Random integer ratings over external ids 1..n."""
    triples = []
    for u in range(1, n_users + 1):
        for i in range(1, n_items + 1):
            if rng.random() < density:
                triples.append((u, i, int(rng.integers(1, 6))))
    if not triples:
        triples.append((1, 1, 3))
    return fr.RatingsMatrix.from_triples(triples)


# ---------------------------------------------------------------------------
# Optional MovieLens 100k data.  Point FCAREC_ML100K_DIR at an unpacked
# ml-100k directory (u1.base / u1.test); without it the full-dataset
# criteria are skipped.
# ---------------------------------------------------------------------------

ML100K_DIR = Path(os.environ.get(
    "FCAREC_ML100K_DIR",
    Path(__file__).resolve().parent.parent / "data" / "ml-100k",
))


def ml100k_available() -> bool:
    return (ML100K_DIR / "u1.base").exists() and (ML100K_DIR / "u1.test").exists()

requires_ml100k = pytest.mark.skipif(
    not ml100k_available(),
    reason=f"MovieLens 100k not found at {ML100K_DIR} "
           f"(set FCAREC_ML100K_DIR to an unpacked ml-100k directory)",
)


@pytest.fixture(scope="session")
def ml100k_split():
    if not ml100k_available():
        pytest.skip(f"MovieLens 100k not found at {ML100K_DIR}")
    return fr.load_split_files(ML100K_DIR / "u1.base", ML100K_DIR / "u1.test")


@pytest.fixture(scope="session")
def ml100k_full_model(ml100k_split):
    """One full-coverage factorization of the training context, reused by
    every criterion that needs factor prefixes (the runs are expensive)."""
    train, _ = ml100k_split
    ctx = fr.scale(train, 0)
    return ctx, fr.factorize(ctx, 1.0)


# ---------------------------------------------------------------------------
# Acceptance summary: one line per criterion at the end of the run.
# ---------------------------------------------------------------------------

_acceptance_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n, title): marks one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.skipped):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        reason = ""
        if report.skipped:
            reason = f" ({report.longrepr[2] if isinstance(report.longrepr, tuple) else report.longrepr})"
        _acceptance_results[n] = (title, status, reason)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance_results):
        title, status, reason = _acceptance_results[n]
        terminalreporter.write_line(f"criterion {n:2d} [{status}] {title}{reason}")
