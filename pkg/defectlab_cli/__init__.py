import json
import os


DEFECTLAB_THREADS = int(os.getenv("DEFECTLAB_THREADS", "1"))
DEFECTLAB_LOG_LEVEL = os.getenv("DEFECTLAB_LOG_LEVEL", "INFO")
DEFECTLAB_DEFAULTS = json.loads(os.getenv("DEFECTLAB_DEFAULTS", "{}"))
