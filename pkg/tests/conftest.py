import pytest

from critjudge.model import Passage, Query, QueryPassagePair

Q18 = Query("q18", "dog age by teeth")
P4068 = Passage(
    "p4068",
    "Puppies start to get their puppy teeth at the age of 3 to 4 weeks. They will start with 28 puppy "
    "teeth. These teeth will be replaced with their 42 permanent adult teeth at about the age of four "
    "months. Dogs have four different types of teeth",
)
P75 = Passage(
    "p75",
    "Humans and most other mammals have a temporary set of teeth, the deciduous, or milk, teeth; in "
    "humans, they usually erupt between the 6th and 24th months. These number 20 in all: 2 central "
    "incisors, 2 lateral incisors, 2 canines, and 4 premolars in each jaw. At about six years of age, "
    "the preliminary teeth begin to be shed as the permanent set replaces them.",
)
Q35 = Query("q35", "Do larger lobsters become tougher when cooked?")
P8163 = Passage(
    "p8163",
    "I thought the whole bigger lobsters are tougher business was a myth. Larger lobsters are easier "
    "to overcook, making them tougher...but cooked properly they are no tougher. Also, meat from "
    "soft-shell lobsters is more tender than that from hard-shell lobsters. At least that's what I've read.",
)
P4661 = Passage(
    "p4661",
    "by the time a lobster gets to 3lbs, it is starting to get tough. long time cooking softens it up. "
    "a long time ago, we bought 6-8 lb lobsters in the waltham market. regular price $0.79 a lb. "
    "special, $0.69 a pound. those babies were tough. cook for about an hour, then chop them up for "
    "salad. Reply. slawecki.",
)

TEETH_PAIRS = [QueryPassagePair(Q18, P4068), QueryPassagePair(Q18, P75)]
LOBSTER_PAIRS = [QueryPassagePair(Q35, P8163), QueryPassagePair(Q35, P4661)]


@pytest.fixture
def q18_p4068():
    return TEETH_PAIRS[0]


@pytest.fixture
def q18_p75():
    return TEETH_PAIRS[1]


# ---- acceptance summary: one PASS/FAIL line per criterion -----------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test covers")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = _markers.get(report.nodeid)
    if marker is None:
        return
    number, title = marker
    ok = report.passed
    prev = _criteria.get(number, (title, True))
    _criteria[number] = (title, prev[1] and ok)


_markers: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _markers[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"AC{number:<3} {'PASS' if ok else 'FAIL'}  {title}")
