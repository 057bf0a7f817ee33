from .envs import PersonaEnvironment, ReplayEnvironment
from .policy import QPolicyClassifier, policy_as_classifier, record_state
from .qlearning import (EpisodeLog, QTable, RlConfig, Transition, epsilon_greedy, q_bound,
                        q_update, train_q)
from .toy import DeterministicMDP, chain_mdp

__all__ = [
    "DeterministicMDP", "EpisodeLog", "PersonaEnvironment", "QPolicyClassifier", "QTable",
    "ReplayEnvironment", "RlConfig", "Transition", "chain_mdp", "epsilon_greedy",
    "policy_as_classifier", "q_bound", "q_update", "record_state", "train_q",
]
