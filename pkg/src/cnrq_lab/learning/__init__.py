from cnrq_lab.learning.base import Algorithm, LearnerSettings
from cnrq_lab.learning.ceq import CEQ, SemiDistributedCEQ
from cnrq_lab.learning.cnrq import CNRQ
from cnrq_lab.learning.qnr import QnR
from cnrq_lab.learning.regret_matching import StatewiseRegretMatching

ALGORITHMS: dict[str, type[Algorithm]] = {
    cls.name: cls for cls in (CNRQ, CEQ, SemiDistributedCEQ, QnR, StatewiseRegretMatching)
}

__all__ = ["ALGORITHMS", "Algorithm", "LearnerSettings"]
