"""Classification with one SRKDE per class.

A query ``v`` gets likelihoods ``L_j = |S_j| f_j(v) / sum_h |S_h| f_h(v)`` and
is assigned to the class with the largest one. Each ``f_j`` sums only over
the ``k_prime`` nearest class-``j`` instances of ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import SRKDEModel, build_srkde, log_estimate_srkde, srkde_bandwidths, srkde_with_sigmas
from .neighbors import as_points

DEFAULT_K_PRIME = 64


@dataclass(frozen=True)
class Likelihoods:
    """Per-class likelihoods for one query.

    ``fallback`` is set when every class density underflowed to zero; the
    values are then uniform.
    """

    classes: tuple
    values: np.ndarray
    fallback: bool = False

    def as_dict(self) -> dict:
        return dict(zip(self.classes, self.values.tolist()))

    def best(self):
        # np.argmax returns the first maximum, i.e. the earliest class.
        return self.classes[int(np.argmax(self.values))]


@dataclass(frozen=True)
class ClassifierModel:
    classes: tuple
    models: tuple[SRKDEModel, ...]
    counts: tuple[int, ...]
    k: int
    beta: float | None
    k_prime: int

    @property
    def m(self) -> int:
        return self.models[0].m

    @property
    def total(self) -> int:
        return sum(self.counts)

    def log_scores(self, v) -> np.ndarray:
        """``log(|S_j| f_j(v))`` for every class, in class order."""
        out = np.empty(len(self.classes))
        for j, (model, count) in enumerate(zip(self.models, self.counts)):
            kp = min(self.k_prime, model.n)
            out[j] = math.log(count) + log_estimate_srkde(model, v, kp)
        return out

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "beta": self.beta,
            "k_prime": self.k_prime,
            "classes": [
                {
                    "label": label,
                    "count": count,
                    "beta": model.beta,
                    "eps_clamp": model.eps_clamp,
                    "points": model.data.tolist(),
                    "sigmas": model.sigmas.tolist(),
                }
                for label, count, model in zip(self.classes, self.counts, self.models)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, verify: bool = False) -> "ClassifierModel":
        """Rebuild from :meth:`to_dict` output.

        Stored bandwidths are used as-is. With ``verify=True`` they are
        recomputed from the points and compared to 1e-12 relative.
        """
        classes, models, counts = [], [], []
        k = int(d["k"])
        for entry in d["classes"]:
            pts = as_points(entry["points"], f"class {entry['label']!r}")
            if pts.shape[1] != d["m"]:
                raise ValueError(f"class {entry['label']!r}: points have dimension {pts.shape[1]}, model m={d['m']}")
            if len(pts) != entry["count"]:
                raise ValueError(f"class {entry['label']!r}: count {entry['count']} but {len(pts)} points")
            model = srkde_with_sigmas(pts, entry["sigmas"], k=k, beta=entry["beta"], eps_clamp=entry["eps_clamp"])
            if verify:
                kth = model.index.kth_distances(k)
                expect = srkde_bandwidths(kth, model.m, k, model.beta, model.eps_clamp)
                if not np.allclose(model.sigmas, expect, rtol=1e-12, atol=0.0):
                    raise ValueError(f"class {entry['label']!r}: stored bandwidths do not match recomputation")
            classes.append(entry["label"])
            models.append(model)
            counts.append(int(entry["count"]))
        return cls(tuple(classes), tuple(models), tuple(counts), k, d.get("beta"), int(d["k_prime"]))


def train(
    points,
    labels,
    k: int,
    beta: float | None = None,
    k_prime: int = DEFAULT_K_PRIME,
    *,
    beta0: float = 1.0,
    threads: int | None = None,
) -> ClassifierModel:
    """Fit one SRKDE per class.

    Classes are ordered by first appearance in ``labels``. Every class uses the
    same ``k``; ``beta`` is shared when given, otherwise each class uses
    ``beta0 * |S_j|**(2/3)``.
    """
    points = as_points(points)
    labels = list(labels)
    if len(labels) != len(points):
        raise ValueError(f"{len(labels)} labels for {len(points)} points")
    if k_prime < 1:
        raise ValueError(f"k_prime must be >= 1, got {k_prime}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    classes = list(dict.fromkeys(labels))
    lab = np.array(labels, dtype=object)
    models, counts = [], []
    for c in classes:
        members = points[lab == c]
        if len(members) < k + 1:
            raise ValueError(f"class {c!r} has {len(members)} instances; k={k} needs at least {k + 1}")
        models.append(build_srkde(members, k, beta, beta0=beta0, threads=threads))
        counts.append(len(members))
    return ClassifierModel(tuple(classes), tuple(models), tuple(counts), k, beta, int(k_prime))


def likelihoods(model: ClassifierModel, v) -> Likelihoods:
    """Normalized class likelihoods at one point ``v``."""
    scores = model.log_scores(v)
    top = scores.max()
    if not np.isfinite(top):
        n = len(model.classes)
        return Likelihoods(model.classes, np.full(n, 1.0 / n), fallback=True)
    w = np.exp(scores - top)
    return Likelihoods(model.classes, w / w.sum())


def predict(model: ClassifierModel, v):
    """Class with the largest likelihood; ties go to the earliest class."""
    return likelihoods(model, v).best()


def predict_many(model: ClassifierModel, points) -> list:
    points = as_points(points, "queries")
    if points.shape[1] != model.m:
        raise ValueError(f"queries have dimension {points.shape[1]}, model m={model.m}")
    return [predict(model, v) for v in points]
