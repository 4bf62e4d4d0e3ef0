#!/usr/bin/env python3
"""Generate the bundled synthetic survival datasets.

Each dataset comes from a planted nonnegative latent model. Sample loadings
are normalized so row magnitudes stay comparable (as they do for dummy-coded
and min-max-scaled tables); feature patterns overlap so the covariates carry
deliberate redundancy; the hazard depends on a contrast between correlated
latent components, so unsupervised variance-driven factorizations do not
automatically align with the survival signal. The committed CSVs are produced
by this script with the seeds below; rerunning it reproduces them exactly.
"""

import csv
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def make_loadings(rng, n, r, boost=2.0, noise=0.5):
    """Nonnegative sample loadings with rows scaled to unit sum."""
    z = rng.integers(0, r, size=n)
    w = rng.gamma(shape=1.5, scale=noise, size=(n, r))
    w[np.arange(n), z] += rng.gamma(shape=4.0, scale=boost / 2.0, size=n)
    w /= w.sum(axis=1, keepdims=True)
    return w, z


def make_patterns(rng, p, r, anchors_per_component, n_shared, n_noise):
    h = rng.uniform(0.0, 0.15, size=(p, r))
    col = 0
    for l in range(r):
        for _ in range(anchors_per_component):
            h[col, l] += rng.uniform(0.7, 1.0)
            col += 1
    for _ in range(n_shared):  # redundant features spanning two components
        a, b = rng.choice(r, size=2, replace=False)
        h[col, a] += rng.uniform(0.5, 0.8)
        h[col, b] += rng.uniform(0.5, 0.8)
        col += 1
    for _ in range(n_noise):
        h[col, :] = rng.uniform(0.0, 0.05, size=r)
        col += 1
    assert col == p
    return h


def survival_from_scores(rng, eta, base_scale, censor_scale):
    eta = eta - eta.mean()
    event_time = base_scale * rng.exponential(size=len(eta)) / np.exp(eta)
    censor_time = censor_scale * rng.exponential(size=len(eta))
    time = np.minimum(event_time, censor_time)
    event = (event_time <= censor_time).astype(int)
    time = np.maximum(np.round(time, 3), 0.001)
    return time, event


def write_csv(name, header, rows):
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / name
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows, {len(header)} cols)")


def fmt(x):
    return format(float(x), ".6g")


def numeric_rows(time, event, x):
    return [[fmt(time[i]), event[i]] + [fmt(v) for v in x[i]]
            for i in range(len(time))]


def gen_lowrank():
    """Moderate size, clear 3-component structure, ~40% censoring."""
    rng = np.random.default_rng(911)
    n, r = 400, 3
    anchors, shared, noise = 4, 4, 2
    p = r * anchors + shared + noise
    w, _ = make_loadings(rng, n, r)
    h = make_patterns(rng, p, r, anchors, shared, noise)
    x = w @ h.T + rng.uniform(0.0, 0.08, size=(n, p))
    # hazard contrasts components 0 and 1; component 2 is survival-neutral
    eta = 3.2 * w[:, 0] - 2.2 * w[:, 1]
    time, event = survival_from_scores(rng, eta, base_scale=10.0, censor_scale=14.0)
    header = ["time", "event"] + [f"f{j + 1:02d}" for j in range(p)]
    write_csv("synth_lowrank.csv", header, numeric_rows(time, event, x))


def gen_redundant():
    """Wider table with heavy redundancy and binary service flags."""
    rng = np.random.default_rng(912)
    n, r = 600, 4
    anchors, shared, noise = 3, 8, 2
    p = r * anchors + shared + noise
    w, z = make_loadings(rng, n, r, noise=0.6)
    h = make_patterns(rng, p, r, anchors, shared, noise)
    x = w @ h.T + rng.uniform(0.0, 0.06, size=(n, p))
    # binary flags tied to the latent cluster with flip noise
    flags = np.zeros((n, 3), dtype=int)
    for j in range(3):
        prob = np.clip(w[:, j] * 2.2, 0.03, 0.97)
        flags[:, j] = (rng.random(n) < prob).astype(int)
    eta = 2.8 * w[:, 1] - 2.4 * w[:, 2] + 0.7 * flags[:, 1]
    time, event = survival_from_scores(rng, eta, base_scale=24.0, censor_scale=40.0)
    header = (["time", "event"] + [f"f{j + 1:02d}" for j in range(p)] +
              [f"flag{j + 1}" for j in range(3)])
    rows = [[fmt(time[i]), event[i]] + [fmt(v) for v in x[i]] +
            [int(v) for v in flags[i]] for i in range(n)]
    write_csv("synth_redundant.csv", header, rows)


def gen_mixed():
    """Numeric + categorical columns, heavier censoring (~55%)."""
    rng = np.random.default_rng(913)
    n, r = 500, 3
    anchors, shared, noise = 3, 3, 1
    p = r * anchors + shared + noise
    w, z = make_loadings(rng, n, r, boost=2.4)
    h = make_patterns(rng, p, r, anchors, shared, noise)
    x = w @ h.T + rng.uniform(0.0, 0.07, size=(n, p))
    labels = np.array(["alpha", "beta", "gamma"])[z]
    flip = rng.random(n) < 0.1
    labels[flip] = rng.choice(["alpha", "beta", "gamma"], size=flip.sum())
    group_effect = np.where(labels == "alpha", 0.9,
                            np.where(labels == "beta", 0.0, -0.5))
    eta = 2.6 * w[:, 2] - 2.0 * w[:, 0] + group_effect
    time, event = survival_from_scores(rng, eta, base_scale=6.0, censor_scale=5.0)
    header = ["time", "event", "group"] + [f"f{j + 1:02d}" for j in range(p)]
    rows = [[fmt(time[i]), event[i], labels[i]] + [fmt(v) for v in x[i]]
            for i in range(n)]
    write_csv("synth_mixed.csv", header, rows)


if __name__ == "__main__":
    gen_lowrank()
    gen_redundant()
    gen_mixed()
