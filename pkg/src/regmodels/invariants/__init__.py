from .arith import TamagawaResult, count_points, index_and_deficiency, \
    locally_soluble, tamagawa
from .compgroup import ComponentGroup, component_group
from .fibre import SpecialFibre, special_fibre
from .tate import TateResult, tate_oracle

__all__ = ["SpecialFibre", "special_fibre", "ComponentGroup",
           "component_group", "TamagawaResult", "tamagawa",
           "index_and_deficiency", "locally_soluble", "count_points",
           "TateResult", "tate_oracle"]
