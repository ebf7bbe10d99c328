import pytest

from cornrate.core_data import PatentTrialSet, TrialComparison

# Trial tables transcribed from the published snapshot of the patent
# yield workbook: patented vs control yields per test.
SNAPSHOT_TRIALS = {
    "5502272": [
        (99.7, 99.6, "3615"),
        (146.3, 144.2, "3578"),
        (146.0, 146.5, "3475"),
        (144.9, 143.0, "DK535"),
    ],
    "5491290": [
        (156.8, 154.5, "3417"),
        (159.9, 158.1, "3398"),
        (156.7, 159.7, "3394"),
        (154.5, 150.2, "3379"),
        (155.3, 148.1, "3362"),
        (155.4, 144.1, "WYF627"),
    ],
    "5557035": [
        (151.8, 138.1, "3563"),
        (152.7, 150.0, "3417"),
        (141.6, 146.9, "3394"),
    ],
}


def make_trial_set(patent_number: str) -> PatentTrialSet:
    return PatentTrialSet(
        patent_number=patent_number,
        comparisons=[TrialComparison(p, c, name)
                     for p, c, name in SNAPSHOT_TRIALS[patent_number]],
    )


@pytest.fixture
def snapshot_trial_sets():
    return {n: make_trial_set(n) for n in SNAPSHOT_TRIALS}
