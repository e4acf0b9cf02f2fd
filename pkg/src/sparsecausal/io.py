"""Plain-text formats for panels, specs, graphs, precisions and networks.

Indices in every file are 0-based; only the panel header names variables
``v1..vp``. Floats are written with ``repr`` so they round-trip exactly.
"""

import csv
import io as _io
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .simulator import CausalityNetwork, ProcessSpec, TimeSeriesPanel
from .tmfg import ChordalGraph


def _open_w(path):
    return open(path, "w", newline="")


def write_panel(panel, path):
    data = panel.data
    with _open_w(path) as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"v{k + 1}" for k in range(data.shape[1])])
        for t, row in enumerate(data):
            w.writerow([t] + [repr(float(x)) for x in row])


def read_panel(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if not header or header[0] != "t":
        raise InvalidArgumentError(f"{path}: panel header must start with 't'")
    data = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
    return TimeSeriesPanel(data.reshape(len(rows) - 1, len(header) - 1))


def format_spec(spec):
    """Spec file: ``p``, ``tau``, ``seed`` lines, then ``lag i j value`` triplets.

    ``lag`` runs from 1; entry ``(lag, i, j)`` is ``A_lag[i, j]``.
    """
    lines = ["# sparsecausal process spec", f"p {spec.p}", f"tau {spec.tau}",
             f"seed {spec.seed if spec.seed is not None else 'none'}", "coefficients"]
    for lag, i, j in zip(*np.nonzero(spec.coeffs)):
        lines.append(f"{lag + 1} {i} {j} {float(spec.coeffs[lag, i, j])!r}")
    return "\n".join(lines) + "\n"


def parse_spec(text):
    header = {}
    triplets = []
    in_coeffs = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "coefficients":
            in_coeffs = True
            continue
        parts = line.split()
        if in_coeffs:
            lag, i, j, value = parts
            triplets.append((int(lag), int(i), int(j), float(value)))
        else:
            header[parts[0]] = parts[1]
    try:
        p, tau = int(header["p"]), int(header["tau"])
    except KeyError as exc:
        raise InvalidArgumentError(f"spec file missing field {exc}") from exc
    seed = header.get("seed", "none")
    coeffs = np.zeros((tau, p, p))
    for lag, i, j, value in triplets:
        coeffs[lag - 1, i, j] = value
    return ProcessSpec(p=p, tau=tau, coeffs=coeffs, seed=None if seed == "none" else int(seed))


def write_spec(spec, path):
    Path(path).write_text(format_spec(spec))


def read_spec(path):
    return parse_spec(Path(path).read_text())


def format_graph(graph):
    """Edge list, then ``cliques`` and ``separators`` blocks, one tuple per line."""
    out = [f"vertices {graph.n_vertices}", f"edges {len(graph.edges)}"]
    out += [f"{i} {j}" for i, j in sorted(graph.edges)]
    out.append(f"cliques {len(graph.cliques)}")
    out += [" ".join(map(str, c)) for c in graph.cliques]
    out.append(f"separators {len(graph.separators)}")
    out += [" ".join(map(str, s)) for s in graph.separators]
    return "\n".join(out) + "\n"


def parse_graph(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    pos = 0

    def block(name):
        nonlocal pos
        key, count = lines[pos].split()
        if key != name:
            raise InvalidArgumentError(f"expected '{name}' block, found '{key}'")
        rows = [tuple(int(x) for x in ln.split()) for ln in lines[pos + 1: pos + 1 + int(count)]]
        pos += 1 + int(count)
        return rows

    key, n = lines[0].split()
    if key != "vertices":
        raise InvalidArgumentError("graph text must start with 'vertices'")
    pos = 1
    edges = block("edges")
    cliques = block("cliques")
    separators = block("separators")
    return ChordalGraph(int(n), set(edges), cliques, separators)


def write_precision(prec, path, q=None):
    """Sparse triplets ``i,j,value`` (upper triangle incl. diagonal) after a metadata header."""
    J = prec.J
    with _open_w(path) as fh:
        fh.write(f"# method={prec.method} gamma={prec.gamma!r} N={J.shape[0]} q={q if q is not None else ''}\n")
        w = csv.writer(fh)
        w.writerow(["i", "j", "value"])
        for i, j in zip(*np.nonzero(np.triu(J))):
            w.writerow([int(i), int(j), repr(float(J[i, j]))])


def read_precision(path):
    """Returns ``(J, metadata)``."""
    with open(path) as fh:
        meta_line = fh.readline()
        body = fh.read()
    meta = dict(kv.split("=", 1) for kv in meta_line.lstrip("# ").split())
    n = int(meta["N"])
    J = np.zeros((n, n))
    for row in csv.DictReader(_io.StringIO(body)):
        i, j, v = int(row["i"]), int(row["j"]), float(row["value"])
        J[i, j] = J[j, i] = v
    return J, meta


def write_te_matrix(te, path):
    with _open_w(path) as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "T", "mode"])
        p = te.values.shape[0]
        for i in range(p):
            for j in range(p):
                if i != j:
                    w.writerow([i, j, repr(float(te.values[i, j])), te.mode])


def write_network(network, path):
    with _open_w(path) as fh:
        w = csv.writer(fh)
        w.writerow(["source", "target"])
        w.writerows(network.edges())


def read_network(path, p):
    adj = np.zeros((p, p), dtype=bool)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            adj[int(row["source"]), int(row["target"])] = True
    return CausalityNetwork(adj)


CONFUSION_FIELDS = ["TP", "FP", "FN", "TN", "n", "K", "m", "P"]


def confusion_row(counts, p):
    """``TP,FP,FN,TN,n,K,m,P`` where ``P = p^2 - p`` is the number of ordered pairs."""
    return [counts.TP, counts.FP, counts.FN, counts.TN, counts.n, counts.K, counts.m, p * p - p]


def write_confusion(counts, p, path):
    with _open_w(path) as fh:
        w = csv.writer(fh)
        w.writerow(CONFUSION_FIELDS)
        w.writerow(confusion_row(counts, p))
