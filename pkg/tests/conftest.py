import json

import numpy as np
import pytest

from topogap import ActivationMatrix, FunctionalGraph, write_activation_file


def write_model_files(directory, model_id, values, train_acc, test_acc=None,
                      labels=None, node_ids=None):
    """Write <model_id>.actv plus its metadata sidecar; returns the actv path."""
    values = np.asarray(values, dtype=np.float64)
    if node_ids is None:
        node_ids = [f"L0:U{i}" for i in range(values.shape[0])]
    m = ActivationMatrix(
        values=values, node_ids=tuple(node_ids), model_id=model_id,
        input_labels=labels,
    )
    actv = directory / f"{model_id}.actv"
    write_activation_file(actv, m)
    meta = {
        "model_id": model_id,
        "train_accuracy": train_acc,
        "node_ids": list(node_ids),
    }
    if test_acc is not None:
        meta["test_accuracy"] = test_acc
    (directory / f"{model_id}.meta.json").write_text(json.dumps(meta))
    return actv


def random_graph(rng, n, metric_mode="raw_d"):
    a = rng.random((n, n))
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return FunctionalGraph(
        dissimilarity=a, node_ids=tuple(str(i) for i in range(n)),
        metric_mode=metric_mode,
    )


def planted_suite(directory, n_models, n_nodes, n_inputs, seed=0,
                  shuffle_gaps=False):
    """Synthetic models whose average H0 death is near-linear in the gap.

    Every node activation is alpha * z + sqrt(1 - alpha^2) * noise for a
    shared latent z, so pairwise |corr| ~ alpha^2 and all correlation
    distances concentrate near a gap-dependent level.
    """
    rng = np.random.default_rng(seed)
    gaps = np.linspace(0.05, 0.5, n_models)
    targets = gaps.copy()
    if shuffle_gaps:
        targets = rng.permutation(targets)
    for i, (gap, target) in enumerate(zip(gaps, targets)):
        delta = 0.1 + 0.8 * gap
        alpha = np.sqrt(1.0 - delta)
        z = rng.standard_normal(n_inputs)
        noise = rng.standard_normal((n_nodes, n_inputs))
        values = alpha * z[None, :] + np.sqrt(1.0 - alpha**2) * noise
        write_model_files(
            directory, f"model{i:03d}", values,
            train_acc=0.99, test_acc=0.99 - target,
        )
    return gaps


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
