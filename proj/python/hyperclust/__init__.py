"""Embedding-based clustering of citation networks."""

from ._core import (
    ConvergenceError,
    DegenerateClustering,
    Error,
    Hypergraph,
    InvalidInput,
    ParseError,
    ShapeError,
    SparseMatrix,
    TrainingDiverged,
    calinski_harabasz,
    davies_bouldin,
    decode,
    encode,
    evaluate_metrics,
    glorot_init,
    graph_operator,
    hypergraph_from_adjacency,
    hypergraph_operator,
    kmeans,
    knn_graph,
    knn_hypergraph,
    load_dataset,
    loss_gradients,
    normalized_laplacian,
    reconstruction_loss,
    run,
    set_num_threads,
    silhouette,
    spectral_clustering,
    spectral_embedding,
    sym_eigen_smallest,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
