from .base import BaseClassifier, Classifier, argmax_choice
from .mlp import (InputEncoder, MlpClassifier, MlpConfig, MlpParams, cross_entropy, gradients,
                  init_params, mlp_forward, mlp_train)
from .nb import NaiveBayesClassifier, NbModel, nb_fit, nb_posterior
from .rules import RuleClassifier, RuleTable, default_rules, rule_predict

__all__ = [
    "BaseClassifier", "Classifier", "InputEncoder", "MlpClassifier", "MlpConfig", "MlpParams",
    "NaiveBayesClassifier", "NbModel", "RuleClassifier", "RuleTable", "argmax_choice",
    "cross_entropy", "default_rules", "gradients", "init_params", "mlp_forward", "mlp_train",
    "nb_fit", "nb_posterior", "rule_predict",
]
