"""Built-in example systems and their group charts."""

from .blocks import (MatrixField, ScalarField, constant_field, linear_field,
                     make_block_system, zero_potential)
from .charts import se2_chart, so3_product_chart, translation_chart
from .classical import (ClassicalSystem, make_classical, make_classical_demo,
                        make_classical_trivial)
from .se2 import SE2Initial, SE2System, make_se2, make_se2_nonsimple
from .simple import SimpleMechanicalSystem, make_simple_mechanical
from .wong import (WongSpec, WongSystem, h_norm, make_wong, make_wong_demo,
                   wong_field, wong_field_packed)

__all__ = [
    "MatrixField", "ScalarField", "constant_field", "linear_field",
    "make_block_system", "zero_potential",
    "se2_chart", "so3_product_chart", "translation_chart",
    "ClassicalSystem", "make_classical", "make_classical_demo", "make_classical_trivial",
    "SE2Initial", "SE2System", "make_se2", "make_se2_nonsimple",
    "SimpleMechanicalSystem", "make_simple_mechanical",
    "WongSpec", "WongSystem", "h_norm", "make_wong", "make_wong_demo",
    "wong_field", "wong_field_packed",
]
