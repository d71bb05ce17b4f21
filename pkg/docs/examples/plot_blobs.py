"""
Select the features of two blobs
================================

Two Gaussian blobs lie in the plane of the first two features. The other eighteen features are noise. We learn two
features together with the 5-NN graph of the samples and plot the selection next to the graph.
"""
import matplotlib.pyplot as plt

from graphfs.datasets import gen_synthetic, standardize
from graphfs.evaluation import evaluate_selection
from graphfs.plotting import plot_run
from graphfs.training import TrainConfig, train

dataset = standardize(gen_synthetic("blobs", n=200, seed=0))
report = train(dataset, TrainConfig(m=2, k=5, gamma=0.1, lr=1e-2, epochs=300, seed=0, log_every=50), verbose=1)
print("Selected features:", report.selection.hard_indices)

###############################################################################
# The bars are the weights of the de-duplicated selection matrix. The graph is drawn on the two selected features.

sel = report.selection
plot_run(dataset.X, sel.F, sel.hard_indices, report.graph, labels=dataset.labels,
         feature_names=dataset.feature_names)
plt.show()

###############################################################################
# The selection is evaluated on random splits by the downstream tasks.

eval_report, table = evaluate_selection(dataset, sel.hard_indices, seeds=range(3), recon_epochs=100)
print(table)
