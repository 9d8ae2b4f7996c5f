from .children import ChildDivergence, ChildTrainer, ClassificationChild, DetectionChild
from .controller import ControllerState, controller_update, policy_choices, sample_policy, softmax
from .run import PolicySearch, RewardRecord, evaluate_policy, read_search_log, search, top_k_policies
from .space import SearchSpace, policy_space_size

__all__ = [
    "ChildDivergence",
    "ChildTrainer",
    "ClassificationChild",
    "ControllerState",
    "DetectionChild",
    "PolicySearch",
    "RewardRecord",
    "SearchSpace",
    "controller_update",
    "evaluate_policy",
    "policy_choices",
    "policy_space_size",
    "read_search_log",
    "sample_policy",
    "search",
    "softmax",
    "top_k_policies",
]
