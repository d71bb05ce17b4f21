"""The differentiable k-NN graph learner and the Dirichlet energy."""
from .config import GraphLearnerConfig, TransportPlan, SelectorPair, SimilarityGraph, marginals
from .energy import (
    laplacian, laplacian_var, dirichlet_energy, pairwise_energy, heat_kernel_graph, graph_quality,
    two_bubble_graph
)
from .learner import (
    distance_row, graph_row_weights, assemble_graph, learn_graph_var, alpha_max, simplex_row_solution
)
from .transport import build_cost, sinkhorn_bregman, sinkhorn_var, extract_selectors, exact_knn_row

GraphLearnerConfig = GraphLearnerConfig
TransportPlan = TransportPlan
SelectorPair = SelectorPair
SimilarityGraph = SimilarityGraph
marginals = marginals
laplacian = laplacian
laplacian_var = laplacian_var
dirichlet_energy = dirichlet_energy
pairwise_energy = pairwise_energy
heat_kernel_graph = heat_kernel_graph
graph_quality = graph_quality
two_bubble_graph = two_bubble_graph
distance_row = distance_row
graph_row_weights = graph_row_weights
assemble_graph = assemble_graph
learn_graph_var = learn_graph_var
alpha_max = alpha_max
simplex_row_solution = simplex_row_solution
build_cost = build_cost
sinkhorn_bregman = sinkhorn_bregman
sinkhorn_var = sinkhorn_var
extract_selectors = extract_selectors
exact_knn_row = exact_knn_row
