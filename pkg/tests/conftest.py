"""Shared fixtures and the release-gate report hook.

test_acceptance.py records one line per criterion via ``record_criterion``;
the terminal-summary hook prints them all at the end of the run so the gate
status is visible regardless of output capturing.
"""

import numpy as np
import pytest

from arbortopo.tree import Tree

_CRITERION_LINES = []


def record_criterion(line: str) -> None:
    _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("release gate")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def single_bifurcation():
    """Smallest canonical tree: N=1, terminals at order 2."""
    return Tree(parent=np.array([-1, 0, 1, 1], dtype=np.int32))


@pytest.fixture
def caterpillar3():
    """Caterpillar with 3 branching nodes along a spine of first children."""
    return Tree(parent=np.array([-1, 0, 1, 1, 2, 2, 4, 4], dtype=np.int32))


@pytest.fixture
def perfect_depth2():
    """Perfect binary tree with N=3 (all 4 terminals at order 3)."""
    return Tree(parent=np.array([-1, 0, 1, 1, 2, 2, 3, 3], dtype=np.int32))


@pytest.fixture
def perfect_depth3():
    """Perfect binary tree with N=7 (8 terminals at order 4)."""
    parent = [-1, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7]
    return Tree(parent=np.array(parent, dtype=np.int32))


def make_caterpillar(n: int) -> Tree:
    """Caterpillar with n branching nodes (maximally asymmetric shape)."""
    parent = [-1, 0]
    spine = 1
    for _ in range(n - 1):
        nxt = len(parent)
        parent.extend([spine, spine])
        spine = nxt
    parent.extend([spine, spine])
    return Tree(parent=np.array(parent, dtype=np.int32))
