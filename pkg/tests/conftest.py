import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    """Store one acceptance line for the terminal summary and print it."""
    line = f"[criterion {criterion:>2}] {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append((criterion, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def brute_copula(X, u, v):
    """Empirical copula straight from the definition: mean of 1{U_i <= u, V_i <= v}."""
    n = len(X)
    U = np.array([sum(X[j, 0] <= X[i, 0] for j in range(n)) for i in range(n)]) / n
    V = np.array([sum(X[j, 1] <= X[i, 1] for j in range(n)) for i in range(n)]) / n
    return float(np.mean((U <= u) & (V <= v)))
