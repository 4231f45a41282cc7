from __future__ import annotations
import os
from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Filters
MENN_K = 3
MRNGE_FIRST_ORDER_EDITION = True
MIPF_PARTITIONS = 5
MIPF_SCHEME = "consensus"
MIPF_P = 0.01              # stop when |D_N| < p·|T|
MIPF_G = 1                 # consecutive quiet iterations before stopping
MINFFC_PARTITIONS = 3
MINFFC_SCHEME = "majority"
MINFFC_K = 3
MINFFC_THRESHOLD = 0.0
MINFFC_P = 0.01
MINFFC_G = 3
FILTER_MAX_ITERATIONS = 100

# Trees (C4.5 / ordinal C4.5 / MID)
TREE_CONFIDENCE = 0.25
TREE_MIN_LEAF = 2
TREE_MAX_DEPTH = 100
MID_R = 1.0

# Instance-based learners
MKNN_K = 3
KNN_K = 3
OSDL_INTERPOLATION = 0.5
OSDL_LOWER_BOUND = 0.0
OSDL_UPPER_BOUND = 1.0
OSDL_INTERPOLATION_STEP_SIZE = 10

# Logistic regression (auxiliary learner of MINFFC)
LOGISTIC_TOL = 1e-6
LOGISTIC_MAX_ITER = 1000

# Relabelling
LEXICOGRAPHIC_COMPONENT_LIMIT = 60
EXACT_CHECK_LIMIT = 20

# Data
RMI_THRESHOLD = 0.1
DISCRETIZE_BINS = 4

# Evaluation
FOLDS = 10
NOISE_LEVELS = [0.0, 0.1, 0.2, 0.3]
NOISE_SEEDS = [1, 2, 3]
PREPROCESSINGS = ["none", "relabel", "menn", "mrnge", "mipf", "minffc"]
CLASSIFIERS = ["mknn", "olm", "osdl", "mid"]
ALPHAS = (0.05, 0.10)

DEFAULTS_HELP = """\
Parameter defaults:
  MENN    k = 3
  MRNGE   firstOrderEdition = true
  MIPF    numberPartitions = 5, consensus filter
          confidence = 0.25, 2 items per leaf
          p = 0.01, y_good = ceil(0.01·|T|)
  MINFFC  numberPartitions = 3, majority filter
          k = 3, threshold= 0
          confidence = 0.25, 2 items per leaf
          p = 0.01, g = 3
  MkNN    k = 3, distance = euclidean
  OLM     modeResolution = conservative
          modeClassification = conservative
  OSDL    classificationType = media, balanced = No
          weighted = No, tuneInterpolationParameter = No,
          lowerBound = 0, upperBound = 1
          interpolationParameter = 0.5, interpolationStepSize = 10
  MID     confidence = 0.25, 2 items per leaf, R = 1
"""


class Settings(BaseModel):
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    data_dir: str = "data"
    out_dir: str = "out"


def load_settings() -> Settings:
    load_dotenv()
    return Settings(
        workers=int(os.getenv("MONOFILTER_WORKERS", 1)),
        log_level=os.getenv("MONOFILTER_LOG_LEVEL", "INFO"),
        data_dir=os.getenv("MONOFILTER_DATA_DIR", "data"),
        out_dir=os.getenv("MONOFILTER_OUT_DIR", "out"),
    )
