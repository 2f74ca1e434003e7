import os
import sys

# pin BLAS threads before numpy loads anywhere; small-matrix workload
if "numpy" not in sys.modules:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")

sys.path.insert(0, os.path.dirname(__file__))
