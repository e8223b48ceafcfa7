from pathlib import Path

from chainstab.chaindag import BlockDag

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# two peers p = 0, q = 1
FIG1_ARRIVALS = ((1.1, 0), (2.4, 0), (4.0, 1), (6.2, 1))
FIG1_EPOCHS = ((0, 2.6, 1), (0, 5.2, 1), (1, 5.8, 0), (1, 6.9, 0))
FIG1_REFS = [(), (0,), (1,), (1,), (2,)]


def fig1_dag():
    dag = BlockDag()
    for (t, p), refs in zip(FIG1_ARRIVALS, FIG1_REFS[1:]):
        dag.add(p, t, refs)
    return dag
