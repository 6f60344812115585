#!/usr/bin/env python3
"""
Evaluation Metrics
Attachment scores for parsed treebanks and classification metrics for polarity labels.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import matplotlib
matplotlib.use('Agg')  # non-interactive backend
import matplotlib.pyplot as plt
import numpy as np
import seaborn as sns
from sklearn.metrics import accuracy_score, confusion_matrix, precision_recall_fscore_support

from sentiment.polarity_engine import PolarityLabel, label_of_stars
from syntax.treebank_io import DependencyTree


TERNARY_LABELS = [label.value for label in PolarityLabel]
STAR_LABELS = ['1', '2', '3', '4', '5']
SCALES = ('ternary', 'stars')


class EvaluationError(ValueError):
    """Gold and predicted data cannot be compared."""


@dataclass(frozen=True)
class ParseMetrics:
    uas: float
    las: float
    token_count: int
    sentence_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {'uas': round(self.uas, 2), 'las': round(self.las, 2),
                'tokens': self.token_count, 'sentences': self.sentence_count}

    def print_table(self):
        print("\n" + "=" * 40)
        print("PARSING EVALUATION")
        print("=" * 40)
        print(f"{'Sentences':<12} {self.sentence_count:>10}")
        print(f"{'Tokens':<12} {self.token_count:>10}")
        print(f"{'UAS':<12} {self.uas:>10.2f}")
        print(f"{'LAS':<12} {self.las:>10.2f}")
        print("=" * 40)


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float
    labels: List[str]
    confusion: List[List[int]]
    per_class_f1: Dict[str, float]
    macro_f1: float
    instances: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'accuracy': round(self.accuracy, 2),
            'instances': self.instances,
            'labels': list(self.labels),
            'confusion_matrix': [list(row) for row in self.confusion],
            'per_class_f1': {k: round(v, 4) for k, v in self.per_class_f1.items()},
            'macro_f1': round(self.macro_f1, 4),
        }

    def print_table(self):
        print("\n" + "=" * 60)
        print("POLARITY EVALUATION")
        print("=" * 60)
        print(f"\nInstances: {self.instances}")
        print(f"Accuracy:  {self.accuracy:.2f}%")
        print(f"Macro F1:  {self.macro_f1:.3f}")

        print("\n" + "-" * 60)
        header = 'Gold/Pred'
        print(f"{header:<12}" + ''.join(f"{label:>12}" for label in self.labels) + f"{'F1':>10}")
        print("-" * 60)
        for label, row in zip(self.labels, self.confusion):
            print(f"{label:<12}" + ''.join(f"{count:>12}" for count in row)
                  + f"{self.per_class_f1[label]:>10.3f}")
        print("=" * 60)


def eval_parse(gold: Sequence[DependencyTree], pred: Sequence[DependencyTree]) -> ParseMetrics:
    """
    Unlabeled and labeled attachment scores, punctuation included.

    Args:
        gold: Gold trees
        pred: Predicted trees with identical tokenization

    Raises:
        EvaluationError: sentence counts differ, or a sentence's forms differ
    """
    if len(gold) != len(pred):
        raise EvaluationError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")

    tokens = correct_heads = correct_arcs = 0
    for index, (g, p) in enumerate(zip(gold, pred), 1):
        if g.forms != p.forms:
            raise EvaluationError(
                f"tokenization differs at sentence {index} ({g.sentence_id!r}): "
                f"{len(g)} gold tokens vs {len(p)} predicted")
        for gt, pt in zip(g.tokens, p.tokens):
            tokens += 1
            if gt.head == pt.head:
                correct_heads += 1
                if gt.deprel == pt.deprel:
                    correct_arcs += 1

    if tokens == 0:
        return ParseMetrics(0.0, 0.0, 0, 0)
    return ParseMetrics(100.0 * correct_heads / tokens, 100.0 * correct_arcs / tokens,
                        tokens, len(gold))


def _as_star(value) -> str:
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise EvaluationError(f"star rating must be an integer, got {value!r}")
    if not 1 <= value <= 5:
        raise EvaluationError(f"star rating {value!r} outside 1..5")
    return str(int(value))


def _as_label(value, scale: str) -> str:
    if scale == 'stars':
        return _as_star(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return label_of_stars(value).value
    return PolarityLabel.parse(value).value


def eval_labels(gold: Sequence, pred: Sequence, scale: str = 'ternary') -> ClassMetrics:
    """
    Accuracy, confusion matrix and per-class F1.

    Args:
        gold: Gold labels, or star ratings (merged to labels on the ternary scale)
        pred: Predicted labels (ternary) or star ratings (stars)
        scale: 'ternary' or 'stars'

    Returns:
        ClassMetrics with the confusion matrix over the full label set
    """
    if scale not in SCALES:
        raise EvaluationError(f"unknown scale {scale!r} (expected ternary or stars)")
    if len(gold) != len(pred):
        raise EvaluationError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    if not gold:
        raise EvaluationError("nothing to evaluate")

    labels = STAR_LABELS if scale == 'stars' else TERNARY_LABELS
    try:
        y_true = [_as_label(v, scale) for v in gold]
        y_pred = [_as_label(v, scale) for v in pred]
    except ValueError as e:
        raise EvaluationError(str(e))
    unknown = sorted(set(y_true + y_pred) - set(labels))
    if unknown:
        raise EvaluationError(f"labels {unknown} not on the {scale} scale")

    cm = confusion_matrix(y_true, y_pred, labels=labels)
    _, _, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=labels, average=None, zero_division=0)

    # macro average over classes that occur in gold or prediction
    present = [label for label in labels if label in set(y_true) | set(y_pred)]
    _, _, macro_f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=present, average='macro', zero_division=0)

    return ClassMetrics(
        accuracy=100.0 * float(accuracy_score(y_true, y_pred)),
        labels=list(labels),
        confusion=np.asarray(cm).astype(int).tolist(),
        per_class_f1={label: float(score) for label, score in zip(labels, f1)},
        macro_f1=float(macro_f1),
        instances=len(y_true),
    )


def plot_confusion_matrix(metrics: ClassMetrics, save_path, title: str = 'Polarity Confusion Matrix'):
    """
    Plot and save the confusion matrix as a PNG.

    Args:
        metrics: ClassMetrics from eval_labels
        save_path: Output image path
    """
    plt.figure(figsize=(8, 6))
    sns.heatmap(np.array(metrics.confusion), annot=True, fmt='d', cmap='Blues',
                xticklabels=metrics.labels, yticklabels=metrics.labels)
    plt.xlabel('Predicted', fontsize=12)
    plt.ylabel('Gold', fontsize=12)
    plt.title(title, fontsize=14, fontweight='bold')
    plt.tight_layout()
    plt.savefig(save_path, dpi=150, bbox_inches='tight')
    plt.close()
