"""Configuration and environment variables."""
import os
from dotenv import load_dotenv

load_dotenv()

DATABASE_URL = os.getenv("COVSELECT_DATABASE_URL", "sqlite:///./covselect_runs.db")

# Worker count for replications and graph nodes; results do not depend on it.
N_JOBS = int(os.getenv("COVSELECT_N_JOBS", "1"))
LOG_LEVEL = os.getenv("COVSELECT_LOG_LEVEL", "WARNING")

# Numerics
TOL_COLINEAR = float(os.getenv("COVSELECT_TOL_COLINEAR", "1e-10"))
BETA_EPS = float(os.getenv("COVSELECT_BETA_EPS", "1e-15"))
BETA_MAX_ITER = int(os.getenv("COVSELECT_BETA_MAX_ITER", "20000"))

# Selection defaults
DEFAULT_ALPHA = float(os.getenv("COVSELECT_DEFAULT_ALPHA", "0.05"))
GRAPH_KMAX = int(os.getenv("COVSELECT_GRAPH_KMAX", "30"))

# Upper bound on n * columns for an interaction expansion (float64 cells).
MAX_EXPANDED_CELLS = int(float(os.getenv("COVSELECT_MAX_EXPANDED_CELLS", "2e8")))

# Largest number of subsets scored for an external selection.
MAX_SUBSETS = int(os.getenv("COVSELECT_MAX_SUBSETS", "200000"))
