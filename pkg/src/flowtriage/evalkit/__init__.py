from flowtriage.evalkit.ngram import MetricScore, bleu, rouge, rouge_l, rouge_n
from flowtriage.evalkit.embed_f1 import greedy_embedding_f1
from flowtriage.evalkit.ranking import RetrievalJudgment, retrieval_metrics
from flowtriage.evalkit.citations import citation_stats
from flowtriage.evalkit.wilcoxon import WilcoxonResult, wilcoxon_signed_rank
from flowtriage.evalkit.manifest import run_evaluation

__all__ = [
    "MetricScore",
    "RetrievalJudgment",
    "WilcoxonResult",
    "bleu",
    "citation_stats",
    "greedy_embedding_f1",
    "retrieval_metrics",
    "rouge",
    "rouge_l",
    "rouge_n",
    "run_evaluation",
    "wilcoxon_signed_rank",
]
