"""From-scratch linear SVC, CART tree and random forest."""

from .forest import ForestModel, forest_predict, forest_predict_many, forest_train, forest_votes, majority
from .params import dumps_model, from_params, loads_model, model_kind, predict_many, to_params, train_model
from .svc import (
    LinearSvcModel,
    standardization_from_stats,
    sufficient_stats,
    svc_margin,
    svc_margins,
    svc_objective,
    svc_predict,
    svc_predict_many,
    svc_subgradient,
    svc_train,
)
from .tree import TreeModel, TreeNode, best_split, gini, tree_predict, tree_predict_many, tree_train
