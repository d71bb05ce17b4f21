"""The downstream evaluation of the selected features and the learned graphs."""
from .main import EvalReport, evaluate_selection, save_eval
from .metrics import kmeans, wcss, hungarian_align, knn_classify, reconstruction_rmse
from .spectral import spectral_clustering, laplacian_score_rank, laplacian_scores, top_features

EvalReport = EvalReport
evaluate_selection = evaluate_selection
save_eval = save_eval
kmeans = kmeans
wcss = wcss
hungarian_align = hungarian_align
knn_classify = knn_classify
reconstruction_rmse = reconstruction_rmse
spectral_clustering = spectral_clustering
laplacian_score_rank = laplacian_score_rank
laplacian_scores = laplacian_scores
top_features = top_features
