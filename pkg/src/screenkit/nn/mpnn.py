"""Node/edge message-passing encoder.

Each bond carries one state shared by both directions. Per round:

    m_v = sum over incident bonds of  W_msg h_e
    h_v <- relu(W_upd [h_v, m_v] + b)
    m_e = W_emsg [h_i + h_j, sum of states of bonds sharing an endpoint] + b
    h_e <- relu(W_eupd [h_e, m_e] + b)

Readout concatenates the mean node state and the mean bond state of each
graph and applies one dense layer. Batches are block-diagonal: incidence and
pooling matrices are scipy sparse constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..chem.molecule import AROMATIC, Molecule
from ..chem.tensors import ATOM_FEATURES, GraphTensors, to_tensors
from .autograd import Tensor, concat, lmul, relu
from .params import ModelParams, ShapeMismatch

BOND_CODES = (1.0, 2.0, 3.0, AROMATIC)
BOND_FEATURES = len(BOND_CODES)


@dataclass
class GraphBatch:
    x: np.ndarray  # nodes x ATOM_FEATURES
    e: np.ndarray  # bonds x BOND_FEATURES
    incidence: sp.csr_matrix  # nodes x bonds
    incidence_t: sp.csr_matrix
    line: sp.csr_matrix  # bonds x bonds, 1 where two bonds share an endpoint
    node_pool: sp.csr_matrix  # graphs x nodes, mean weights
    edge_pool: sp.csr_matrix  # graphs x bonds, mean weights (empty row for bondless graphs)

    @property
    def n_graphs(self) -> int:
        return self.node_pool.shape[0]


def _bond_list(t: GraphTensors):
    iu, ju = np.nonzero(np.triu(t.A, k=1))
    codes = np.zeros((len(iu), BOND_FEATURES))
    for k, (i, j) in enumerate(zip(iu, ju)):
        order = float(t.A[i, j])
        if order not in BOND_CODES:
            raise ShapeMismatch(f"unsupported bond order {order}")
        codes[k, BOND_CODES.index(order)] = 1.0
    return iu, ju, codes


def make_batch(graphs: list[GraphTensors | Molecule]) -> GraphBatch:
    if not graphs:
        raise ValueError("empty batch")
    xs, es, rows, cols, node_graph, edge_graph = [], [], [], [], [], []
    n_off = e_off = 0
    for g_idx, g in enumerate(graphs):
        t = to_tensors(g) if isinstance(g, Molecule) else g
        if t.X.shape[1] != ATOM_FEATURES:
            raise ShapeMismatch(f"node features have width {t.X.shape[1]}, expected {ATOM_FEATURES}")
        iu, ju, codes = _bond_list(t)
        xs.append(t.X)
        es.append(codes)
        k = np.arange(len(iu)) + e_off
        rows += [iu + n_off, ju + n_off]
        cols += [k, k]
        node_graph.append(np.full(t.n_atoms, g_idx))
        edge_graph.append(np.full(len(iu), g_idx))
        n_off += t.n_atoms
        e_off += len(iu)
    r = np.concatenate(rows) if rows else np.zeros(0, int)
    c = np.concatenate(cols) if cols else np.zeros(0, int)
    inc = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(n_off, e_off))
    line = (inc.T @ inc).tocsr()
    line.setdiag(0.0)
    line.eliminate_zeros()
    return GraphBatch(
        x=np.concatenate(xs),
        e=np.concatenate(es) if e_off else np.zeros((0, BOND_FEATURES)),
        incidence=inc,
        incidence_t=inc.T.tocsr(),
        line=line,
        node_pool=_pool(np.concatenate(node_graph), len(graphs)),
        edge_pool=_pool(np.concatenate(edge_graph), len(graphs)),
    )


def _pool(owner: np.ndarray, n_graphs: int) -> sp.csr_matrix:
    counts = np.bincount(owner, minlength=n_graphs).astype(float)
    w = 1.0 / counts[owner] if len(owner) else np.zeros(0)
    return sp.csr_matrix((w, (owner, np.arange(len(owner)))), shape=(n_graphs, len(owner)))


def init_encoder(params: ModelParams, rng: np.random.Generator, hidden: int, layers: int, embed: int):
    params.add_dense("enc.node_in", ATOM_FEATURES, hidden, rng)
    params.add_dense("enc.edge_in", BOND_FEATURES, hidden, rng)
    for l in range(layers):
        params.add_dense(f"enc.{l}.msg_v", hidden, hidden, rng)
        params.add_dense(f"enc.{l}.upd_v", 2 * hidden, hidden, rng)
        params.add_dense(f"enc.{l}.msg_e", 2 * hidden, hidden, rng)
        params.add_dense(f"enc.{l}.upd_e", 2 * hidden, hidden, rng)
    params.add_dense("enc.readout", 2 * hidden, embed, rng)


def encode(params: ModelParams, batch: GraphBatch) -> Tensor:
    """Graph embeddings, one row per graph in the batch."""
    hv = relu(params.dense("enc.node_in", Tensor(batch.x)))
    he = relu(params.dense("enc.edge_in", Tensor(batch.e)))
    for l in range(params.config["layers"]):
        mv = lmul(batch.incidence, params.dense(f"enc.{l}.msg_v", he))
        me = params.dense(f"enc.{l}.msg_e", concat([lmul(batch.incidence_t, hv), lmul(batch.line, he)]))
        hv = relu(params.dense(f"enc.{l}.upd_v", concat([hv, mv])))
        he = relu(params.dense(f"enc.{l}.upd_e", concat([he, me])))
    pooled = concat([lmul(batch.node_pool, hv), lmul(batch.edge_pool, he)])
    return params.dense("enc.readout", pooled)


def mp_forward(tensors: GraphTensors | Molecule, params: ModelParams) -> np.ndarray:
    """Embedding of a single graph."""
    return encode(params, make_batch([tensors])).value[0]
