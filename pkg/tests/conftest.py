from hypothesis import strategies as st

from infpset import core

ELEMENTS = ("a", "b", "c", "d")

elements = st.sampled_from(ELEMENTS)
ops = st.tuples(st.sampled_from(("add", "remove")), elements)
histories = st.lists(ops, max_size=20)


def replay(history, state=None):
    state = core.initialize() if state is None else state
    for kind, e in history:
        state = getattr(core, kind)(state, e)
    return state


# states reachable from the empty map by some history
reachable = histories.map(replay)
# arbitrary valid counter maps, reachable or not (every one is reachable in fact)
counter_maps = st.dictionaries(elements, st.integers(1, 12)).map(core.CounterMap)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
