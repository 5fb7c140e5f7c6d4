import importlib
import json
import os
import pkgutil


DEFECTLAB_VERIFY_CONFIG = json.loads(os.getenv("DEFECTLAB_VERIFY_CONFIG", "{}"))

DEFAULT_CHECKS = (
    'identity_A', 'identity_B', 'identity_C', 'identity_D', 'identity_E',
    'sos_B', 'sos_A1',
    'block_oracle', 'assembly_oracle', 'nonnegativity',
    'linearized_V0', 'linearized_V1', 'kernel_forms',
    'ode_third_derivative', 'translation_plateau',
)


# Dynamically import all modules in this package
for _, mod_name, _ in pkgutil.iter_modules(__path__):
    importlib.import_module(f"{__name__}.{mod_name}")
